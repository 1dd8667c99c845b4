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

// Monte Carlo experiments on the hybrid SDE: closeness to the averaged
// path over a finite horizon and exit times from neighbourhoods of
// critical points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "switchavg/averaging.hpp"
#include "switchavg/ctmc.hpp"
#include "switchavg/model.hpp"
#include "switchavg/parallel.hpp"
#include "switchavg/rng.hpp"
#include "switchavg/sde.hpp"

namespace switchavg {

struct ProportionEstimate {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

/// Normal-approximation 95% interval, clipped to [0, 1].
inline ProportionEstimate proportion(std::size_t hits, std::size_t n) {
    ProportionEstimate p;
    p.n = n;
    p.estimate = static_cast<double>(hits) / static_cast<double>(n);
    const double half = 1.96 * std::sqrt(p.estimate * (1.0 - p.estimate) / static_cast<double>(n));
    p.ci_low = std::max(0.0, p.estimate - half);
    p.ci_high = std::min(1.0, p.estimate + half);
    return p;
}

struct MonteCarloOptions {
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

namespace detail {

struct SupDeviation {
    const Trajectory* reference;
    double gamma;
    bool exceeded = false;

    bool on_grid(std::size_t k, double, std::span<const double> x, int) {
        if (distance(x, reference->state(k)) >= gamma) {
            exceeded = true;
            return false;
        }
        return true;
    }
};

} // namespace detail

/// Fraction of replicates with sup_{t <= T} |X(t) - Xbar(t)| >= gamma, where
/// Xbar solves the averaged ODE (RK4 on the same grid) from the same x0.
/// The supremum is taken over the grid times.
inline ProportionEstimate sup_deviation_probability(const HybridModel& model, double eps, double delta,
                                                    std::span<const double> x0, int i0, double gamma, double T,
                                                    double dt, std::size_t n, MonteCarloOptions opts = {}) {
    if (n == 0) throw InvalidSpan("need at least one replicate");
    const VectorField avg = averaged_field(model, stationary_distribution(model.generator));
    const Trajectory reference = integrate_ode(avg, x0, T, dt);
    const TimeGrid grid(T, dt);
    std::vector<char> hit(n, 0);
    parallel_for(0, n, opts.threads, [&](std::size_t k) {
        detail::SupDeviation obs{&reference, gamma};
        try {
            integrate_hybrid(model, eps, delta, x0, i0, grid, replicate_stream(opts.seed, k), obs);
        } catch (const BlowupError& e) {
            throw e.with_replicate(k);
        }
        hit[k] = obs.exceeded ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char h : hit) hits += static_cast<std::size_t>(h);
    return proportion(hits, n);
}

struct ExitSample {
    double time = 0.0;
    bool censored = false;
};

struct ExitTimeStats {
    std::vector<double> center;
    double radius = 0.0;
    double budget = 0.0;
    std::vector<ExitSample> samples;
    double fraction_exited = 0.0;
};

/// Budget H * exp(Delta / eps) in case 2, H * exp(Delta / delta) otherwise.
inline double exit_budget(ScaleCase kind, double eps, double delta, double H = 10.0, double Delta = 0.01) {
    return kind == ScaleCase::case2 ? H * std::exp(Delta / eps) : H * std::exp(Delta / delta);
}

namespace detail {

struct ExitWatch {
    std::span<const double> center;
    double radius;
    double exit_time = -1.0;

    bool after_substep(double t, std::span<const double> x) {
        if (distance(x, center) > radius) {
            exit_time = t;
            return false;
        }
        return true;
    }
};

inline int draw_regime(const StationaryDist& nu, Stream s) {
    double u = s.uniform();
    for (std::size_t i = 0; i + 1 < nu.size(); ++i) {
        if (u < nu[i]) return static_cast<int>(i);
        u -= nu[i];
    }
    return static_cast<int>(nu.size() - 1);
}

} // namespace detail

/// First exit of |X - center| > radius for n replicates started at
/// `center`, each with its initial regime drawn from the stationary law.
/// Runs reaching `budget` are kept as censored samples.
inline ExitTimeStats exit_time_experiment(const HybridModel& model, double eps, double delta,
                                          std::span<const double> center, double radius, double budget, double dt,
                                          std::size_t n, MonteCarloOptions opts = {}) {
    constexpr double max_steps = 1e10;
    if (!(budget > 0.0) || !std::isfinite(budget) || budget / dt > max_steps)
        throw InvalidBudget("budget/dt does not fit the sample grid");
    if (n == 0) throw InvalidSpan("need at least one replicate");
    const StationaryDist nu = stationary_distribution(model.generator);
    const TimeGrid grid(budget, dt);

    ExitTimeStats stats;
    stats.center.assign(center.begin(), center.end());
    stats.radius = radius;
    stats.budget = budget;
    stats.samples.resize(n);
    parallel_for(0, n, opts.threads, [&](std::size_t k) {
        const Stream s = replicate_stream(opts.seed, k);
        const int i0 = detail::draw_regime(nu, s.split(stream_tag::initial));
        detail::ExitWatch watch{center, radius};
        try {
            integrate_hybrid(model, eps, delta, center, i0, grid, s, watch);
        } catch (const BlowupError& e) {
            throw e.with_replicate(k);
        }
        stats.samples[k] = watch.exit_time < 0.0 ? ExitSample{budget, true} : ExitSample{watch.exit_time, false};
    });
    std::size_t exited = 0;
    for (const auto& s : stats.samples) exited += s.censored ? 0 : 1;
    stats.fraction_exited = static_cast<double>(exited) / static_cast<double>(n);
    return stats;
}

} // namespace switchavg
