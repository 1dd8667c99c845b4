/*
   Copyright 2026 The switchavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

// Euler-Maruyama for switching diffusions. Regime jumps are simulated
// exactly and every jump time becomes a substep boundary, so the regime is
// constant on each substep.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "switchavg/ctmc.hpp"
#include "switchavg/errors.hpp"
#include "switchavg/model.hpp"
#include "switchavg/parallel.hpp"
#include "switchavg/rng.hpp"

namespace switchavg {

/// Observers may implement any of:
///   void on_substep(double t, std::span<const double> x, int regime, double h)
///       called before each substep with its start state;
///   bool on_grid(std::size_t k, double t, std::span<const double> x, int regime)
///       called at every grid time including t=0, return false to stop;
///   bool after_substep(double t, std::span<const double> x)
///       called with each substep's end state, return false to stop.
struct NullObserver {};

inline Stream chain_stream(const Stream& s) { return s.split(stream_tag::chain); }
inline Stream brownian_stream(const Stream& s) { return s.split(stream_tag::brownian); }

namespace detail {

inline void check_initial_state(const HybridModel& model, std::span<const double> x0) {
    if (x0.size() != model.dim) throw InvalidModel(model.name + ": x0 has wrong dimension");
    for (std::size_t c = 0; c < model.dim; ++c) {
        if (!std::isfinite(x0[c])) throw InvalidModel(model.name + ": x0 is not finite");
        if (c < model.positive.size() && model.positive[c] && !(x0[c] > 0.0))
            throw InvalidModel(model.name + ": x0 outside the positive domain");
    }
}

} // namespace detail

/// Drives one path of the hybrid SDE over `grid`, reporting to `obs`.
/// Returns the time at which the run ended (grid.T unless stopped).
template <class Observer>
double integrate_hybrid(const HybridModel& model, double eps, double delta,
                        std::span<const double> x0, int i0, const TimeGrid& grid, const Stream& stream,
                        Observer& obs) {
    if (!(eps > 0.0)) throw InvalidStep("eps must be positive");
    if (!(delta >= 0.0)) throw InvalidStep("delta must be non-negative");
    detail::check_initial_state(model, x0);

    const std::size_t d = model.dim, mw = model.brownian_dim;
    std::vector<bool> positive(d, false);
    for (std::size_t c = 0; c < model.positive.size(); ++c) positive[c] = model.positive[c];

    RegimeSampler chain(model.generator, eps, i0, 0.0, chain_stream(stream));
    Stream noise = brownian_stream(stream);
    const double sqrt_delta = std::sqrt(delta);

    std::vector<double> x(x0.begin(), x0.end()), y(d), f(d), g(d * mw), dw(mw);
    for (std::size_t c = 0; c < d; ++c) y[c] = positive[c] ? std::log(x[c]) : x[c];

    double t = 0.0;
    if constexpr (requires { obs.on_grid(std::size_t{0}, t, std::span<const double>(x), 0); }) {
        if (!obs.on_grid(0, t, x, chain.state())) return t;
    }

    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double t_next = grid.time(k + 1);
        while (t < t_next) {
            const double t_end = std::min(t_next, chain.next_jump());
            const double h = t_end - t;
            const int regime = chain.state();
            if constexpr (requires { obs.on_substep(t, std::span<const double>(x), regime, h); }) {
                obs.on_substep(t, x, regime, h);
            }

            model.drift(x, regime, f);
            if (delta > 0.0) {
                model.diffusion(x, regime, g);
                const double sh = std::sqrt(h);
                for (auto& w : dw) w = sh * noise.normal();
            }
            for (std::size_t c = 0; c < d; ++c) {
                if (positive[c]) {
                    // Log coordinates: d ln x = (f/x - delta/2 |sigma/x|^2) dt + sqrt(delta) (sigma/x) dW.
                    const double inv = 1.0 / x[c];
                    double incr = f[c] * inv * h;
                    if (delta > 0.0) {
                        double s2 = 0.0, noise_term = 0.0;
                        for (std::size_t j = 0; j < mw; ++j) {
                            const double gj = g[c * mw + j] * inv;
                            s2 += gj * gj;
                            noise_term += gj * dw[j];
                        }
                        incr += -0.5 * delta * s2 * h + sqrt_delta * noise_term;
                    }
                    y[c] += incr;
                } else {
                    double incr = f[c] * h;
                    if (delta > 0.0) {
                        double noise_term = 0.0;
                        for (std::size_t j = 0; j < mw; ++j) noise_term += g[c * mw + j] * dw[j];
                        incr += sqrt_delta * noise_term;
                    }
                    y[c] += incr;
                }
            }
            for (std::size_t c = 0; c < d; ++c) {
                x[c] = positive[c] ? std::exp(y[c]) : y[c];
                if (!std::isfinite(x[c]) || (positive[c] && !(x[c] > 0.0))) throw BlowupError(t_end);
            }
            t = t_end;
            while (chain.next_jump() <= t) chain.jump();
            if constexpr (requires { obs.after_substep(t, std::span<const double>(x)); }) {
                if (!obs.after_substep(t, x)) return t;
            }
        }
        if constexpr (requires { obs.on_grid(k, t, std::span<const double>(x), 0); }) {
            if (!obs.on_grid(k + 1, t, x, chain.state())) return t;
        }
    }
    return t;
}

struct SimOptions {
    /// Record every n-th grid point (the final time is always recorded).
    std::size_t record_every = 1;
};

namespace detail {

struct TrajectoryRecorder {
    Trajectory* traj;
    std::size_t every;
    std::size_t last;

    bool on_grid(std::size_t k, double t, std::span<const double> x, int regime) {
        if (k % every == 0 || k == last) traj->push(t, x, regime);
        return true;
    }
};

} // namespace detail

inline Trajectory simulate(const HybridModel& model, double eps, double delta, std::span<const double> x0,
                           int i0, double T, double dt, const Stream& stream, SimOptions opts = {}) {
    if (!(dt > 0.0)) throw InvalidStep("dt must be positive");
    const TimeGrid grid(T, dt);
    Trajectory traj;
    traj.dim = model.dim;
    traj.meta = {eps, delta, dt, stream.key()};
    detail::TrajectoryRecorder rec{&traj, std::max<std::size_t>(1, opts.record_every), grid.steps};
    integrate_hybrid(model, eps, delta, x0, i0, grid, stream, rec);
    return traj;
}

struct EnsembleOptions {
    std::size_t threads = 1;
    bool keep_trajectories = false;
    SimOptions sim;
};

/// Per-time first and second moments over replicates (row-major, dim per time).
struct EnsembleSummary {
    std::size_t dim = 1;
    std::size_t count = 0;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> second_moment;
    std::vector<Trajectory> trajectories;

    double variance(std::size_t k, std::size_t c) const {
        const double m = mean[k * dim + c];
        return second_moment[k * dim + c] - m * m;
    }
};

inline Stream replicate_stream(std::uint64_t base_seed, std::size_t k) {
    return Stream(base_seed, k, stream_tag::ensemble);
}

/// Replicate k uses replicate_stream(base_seed, k). Trajectories are reduced
/// in replicate order, so the summary does not depend on `threads`.
inline EnsembleSummary simulate_ensemble(const HybridModel& model, double eps, double delta,
                                         std::span<const double> x0, int i0, double T, double dt,
                                         std::size_t n, std::uint64_t base_seed, EnsembleOptions opts = {}) {
    if (n == 0) throw InvalidSpan("ensemble size must be at least 1");
    EnsembleSummary out;
    out.dim = model.dim;
    out.count = n;

    const std::size_t block = 64 * std::max<std::size_t>(1, opts.threads);
    std::vector<Trajectory> batch;
    for (std::size_t start = 0; start < n; start += block) {
        const std::size_t stop = std::min(n, start + block);
        batch.assign(stop - start, Trajectory{});
        parallel_for(start, stop, opts.threads, [&](std::size_t k) {
            try {
                batch[k - start] = simulate(model, eps, delta, x0, i0, T, dt, replicate_stream(base_seed, k), opts.sim);
            } catch (const BlowupError& e) {
                throw e.with_replicate(k);
            }
        });
        for (auto& tr : batch) {
            if (out.times.empty()) {
                out.times = tr.times;
                out.mean.assign(tr.states.size(), 0.0);
                out.second_moment.assign(tr.states.size(), 0.0);
            }
            for (std::size_t i = 0; i < tr.states.size(); ++i) {
                out.mean[i] += tr.states[i];
                out.second_moment[i] += tr.states[i] * tr.states[i];
            }
            if (opts.keep_trajectories) out.trajectories.push_back(std::move(tr));
        }
    }
    for (double& v : out.mean) v /= static_cast<double>(n);
    for (double& v : out.second_moment) v /= static_cast<double>(n);
    return out;
}

} // namespace switchavg
