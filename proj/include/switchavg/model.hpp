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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "switchavg/ctmc.hpp"
#include "switchavg/errors.hpp"

namespace switchavg {

using DriftFn = std::function<void(std::span<const double> x, int regime, std::span<double> out)>;
/// Writes the dim x brownian_dim diffusion matrix, row-major.
using DiffusionFn = std::function<void(std::span<const double> x, int regime, std::span<double> out)>;

/// dX = f(X, a) dt + sqrt(delta) sigma(X, a) dW, with a the chain driven by
/// generator Q/eps. Coordinates flagged positive must have drift and
/// diffusion rows of the form x_k * (...); they are integrated in log
/// coordinates.
struct HybridModel {
    std::string name;
    std::size_t dim = 1;
    std::size_t brownian_dim = 1;
    Generator generator{{{0.0}}};
    DriftFn drift;
    DiffusionFn diffusion;
    std::vector<bool> positive;

    std::size_t regimes() const noexcept { return generator.size(); }
};

/// Registration check: dimensions agree and positivity-flagged coordinates
/// are multiplicative (drift and diffusion row vanish on the axis x_k = 0).
inline void validate_model(const HybridModel& m) {
    if (m.dim == 0 || m.brownian_dim == 0) throw InvalidModel(m.name + ": zero dimension");
    if (!m.drift || !m.diffusion) throw InvalidModel(m.name + ": drift and diffusion required");
    if (!m.positive.empty() && m.positive.size() != m.dim)
        throw InvalidModel(m.name + ": positivity flags must match the state dimension");

    std::vector<double> f(m.dim), g(m.dim * m.brownian_dim);
    for (std::size_t k = 0; k < m.positive.size(); ++k) {
        if (!m.positive[k]) continue;
        for (double base : {0.5, 1.0, 2.0}) {
            std::vector<double> x(m.dim, base);
            x[k] = 0.0;
            for (std::size_t i = 0; i < m.regimes(); ++i) {
                m.drift(x, static_cast<int>(i), f);
                m.diffusion(x, static_cast<int>(i), g);
                bool vanishes = f[k] == 0.0;
                for (std::size_t j = 0; j < m.brownian_dim; ++j)
                    vanishes = vanishes && g[k * m.brownian_dim + j] == 0.0;
                if (!vanishes)
                    throw InvalidModel(m.name + ": coordinate " + std::to_string(k) +
                                       " is flagged positive but is not multiplicative");
            }
        }
    }
}

enum class ScaleCase { case1, case2, case3 };

inline std::string to_string(ScaleCase c) {
    switch (c) {
    case ScaleCase::case1: return "case1";
    case ScaleCase::case2: return "case2";
    case ScaleCase::case3: return "case3";
    }
    return "?";
}

/// Joint scaling of (eps, delta): case1 delta = l*eps, case2 delta = eps^2,
/// case3 delta = min(sqrt(eps), 0.25).
struct ScaleSchedule {
    ScaleCase kind = ScaleCase::case1;
    double l = 1.0;
    std::vector<double> eps;

    double delta_of(double e) const {
        switch (kind) {
        case ScaleCase::case1: return l * e;
        case ScaleCase::case2: return e * e;
        case ScaleCase::case3: return std::min(std::sqrt(e), 0.25);
        }
        return 0.0;
    }

    std::vector<std::pair<double, double>> points() const {
        std::vector<std::pair<double, double>> out;
        for (double e : eps) out.emplace_back(e, delta_of(e));
        return out;
    }

    /// Throws InvalidSchedule naming the violated invariant.
    void validate() const {
        if (eps.empty()) throw InvalidSchedule("eps list is empty");
        if (kind == ScaleCase::case1 && !(l > 0.0)) throw InvalidSchedule("l must be positive");
        for (std::size_t k = 0; k < eps.size(); ++k) {
            if (!(eps[k] > 0.0)) throw InvalidSchedule("eps entries must be positive");
            if (k > 0 && !(eps[k] < eps[k - 1])) throw InvalidSchedule("eps list must be decreasing");
        }
        for (std::size_t k = 1; k < eps.size(); ++k) {
            const double r0 = delta_of(eps[k - 1]) / eps[k - 1];
            const double r1 = delta_of(eps[k]) / eps[k];
            if (kind == ScaleCase::case2 && !(r1 < r0))
                throw InvalidSchedule("case2 requires delta/eps strictly decreasing");
            if (kind == ScaleCase::case3 &&
                !(r1 > r0 && delta_of(eps[k]) <= delta_of(eps[k - 1])))
                throw InvalidSchedule("case3 requires delta/eps increasing with delta non-increasing");
        }
    }

    bool operator==(const ScaleSchedule&) const = default;
};

struct TrajectoryMeta {
    double eps = 0.0;
    double delta = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

/// Time-stamped states (row-major, dim per sample) with regime labels.
struct Trajectory {
    std::size_t dim = 1;
    std::vector<double> times;
    std::vector<double> states;
    std::vector<int> regimes;
    TrajectoryMeta meta;

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
    double at(std::size_t k, std::size_t coord) const { return states[k * dim + coord]; }

    void push(double t, std::span<const double> x, int regime) {
        times.push_back(t);
        states.insert(states.end(), x.begin(), x.end());
        regimes.push_back(regime);
    }
};

/// Fixed-step grid on [0, T]: t_k = k*dt for k < n and t_n = T.
struct TimeGrid {
    double T;
    double dt;
    std::size_t steps;

    TimeGrid(double horizon, double step) : T(horizon), dt(step) {
        if (!(step > 0.0) || !std::isfinite(step)) throw InvalidStep("dt must be positive");
        if (!(horizon > 0.0)) throw InvalidSpan("horizon must be positive");
        if (step > horizon * (1.0 + 1e-12)) throw InvalidStep("dt must not exceed the horizon");
        steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / step - 1e-9)));
    }

    double time(std::size_t k) const { return k >= steps ? T : std::min(static_cast<double>(k) * dt, T); }
};

} // namespace switchavg
