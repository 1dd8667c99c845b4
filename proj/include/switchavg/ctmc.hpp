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

// Finite-state continuous-time Markov chains with generator Q/eps:
// validation, stationary law, and exact event-driven path sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "switchavg/errors.hpp"
#include "switchavg/rng.hpp"

namespace switchavg {

/// Rate matrix of an irreducible chain. Validated on construction.
class Generator {
public:
    explicit Generator(const std::vector<std::vector<double>>& rows) {
        const std::size_t m = rows.size();
        if (m == 0) throw InvalidGenerator("generator must have at least one state");
        q_.reserve(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            if (rows[i].size() != m)
                throw InvalidGenerator("generator row " + std::to_string(i) + " has wrong length");
            q_.insert(q_.end(), rows[i].begin(), rows[i].end());
        }
        m0_ = m;
        validate();
    }

    std::size_t size() const noexcept { return m0_; }
    double rate(std::size_t i, std::size_t j) const { return q_[i * m0_ + j]; }
    /// |q_ii|, the total jump intensity out of state i (before scaling by 1/eps).
    double exit_rate(std::size_t i) const { return -rate(i, i); }

    std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out(m0_);
        for (std::size_t i = 0; i < m0_; ++i)
            out[i].assign(q_.begin() + static_cast<std::ptrdiff_t>(i * m0_),
                          q_.begin() + static_cast<std::ptrdiff_t>((i + 1) * m0_));
        return out;
    }

    bool operator==(const Generator&) const = default;

private:
    void validate() const {
        for (std::size_t i = 0; i < m0_; ++i) {
            double sum = 0.0, scale = 1.0;
            for (std::size_t j = 0; j < m0_; ++j) {
                const double v = rate(i, j);
                if (!std::isfinite(v)) throw InvalidGenerator("non-finite rate");
                if (i != j && v < 0.0)
                    throw InvalidGenerator("negative off-diagonal rate at (" + std::to_string(i) +
                                           "," + std::to_string(j) + ")");
                sum += v;
                scale = std::max(scale, std::abs(v));
            }
            if (std::abs(sum) > 1e-12 * scale)
                throw InvalidGenerator("row " + std::to_string(i) + " does not sum to zero");
        }
        if (!reaches_all(false) || !reaches_all(true))
            throw IrreducibilityError("generator has more than one communicating class");
    }

    // Reachability from state 0 along positive rates (or reversed edges).
    bool reaches_all(bool reversed) const {
        std::vector<char> seen(m0_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < m0_; ++j) {
                const double r = reversed ? rate(j, i) : rate(i, j);
                if (j != i && r > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
    }

    std::size_t m0_ = 0;
    std::vector<double> q_;
};

struct StationaryDist {
    std::vector<double> nu;

    std::size_t size() const noexcept { return nu.size(); }
    double operator[](std::size_t i) const { return nu[i]; }
};

/// Solves nu Q = 0, sum(nu) = 1 by replacing the last balance equation with
/// the normalization and applying LU with partial pivoting.
inline StationaryDist stationary_distribution(const Generator& Q) {
    const auto m = static_cast<Eigen::Index>(Q.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            A(i, j) = Q.rate(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
    A.row(m - 1).setOnes();
    b(m - 1) = 1.0;
    const Eigen::VectorXd x = A.partialPivLu().solve(b);

    StationaryDist out;
    out.nu.assign(x.data(), x.data() + m);
    for (double v : out.nu)
        if (!(v > 0.0)) throw IrreducibilityError("stationary distribution is not strictly positive");
    return out;
}

/// Realized path of the switching chain on [t0, t_end].
struct SwitchingPath {
    std::size_t m0 = 1;
    double t0 = 0.0;
    double t_end = 0.0;
    std::vector<double> jump_times;
    std::vector<int> states;  // states.size() == jump_times.size() + 1

    /// Right-continuous regime at time t (t clamped into the path span).
    int regime_at(double t) const {
        const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
        return states[static_cast<std::size_t>(it - jump_times.begin())];
    }
};

/// Incremental exact sampler for the chain with generator Q/eps. Holding
/// time in state i is Exp(|q_ii|/eps); the next state is j with probability
/// q_ij/|q_ii|. The sampler borrows Q, which must outlive it.
class RegimeSampler {
public:
    RegimeSampler(const Generator& Q, double eps, int i0, double t0, Stream stream)
        : Q_(&Q), eps_(eps), state_(i0), stream_(stream) {
        if (!(eps > 0.0)) throw InvalidStep("eps must be positive");
        if (i0 < 0 || static_cast<std::size_t>(i0) >= Q.size())
            throw InvalidModel("initial regime out of range");
        next_ = t0 + draw_holding();
    }

    int state() const noexcept { return state_; }
    double next_jump() const noexcept { return next_; }

    /// Moves to the state entered at next_jump() and draws the following holding time.
    void jump() {
        const double total = Q_->exit_rate(static_cast<std::size_t>(state_));
        double u = stream_.uniform() * total;
        int target = -1;
        for (std::size_t j = 0; j < Q_->size(); ++j) {
            if (static_cast<int>(j) == state_) continue;
            const double r = Q_->rate(static_cast<std::size_t>(state_), j);
            if (r <= 0.0) continue;
            target = static_cast<int>(j);
            if (u < r) break;
            u -= r;
        }
        state_ = target;
        next_ += draw_holding();
    }

private:
    double draw_holding() {
        const double rate = Q_->exit_rate(static_cast<std::size_t>(state_));
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return stream_.exponential(rate / eps_);
    }

    const Generator* Q_;
    double eps_;
    int state_;
    double next_ = 0.0;
    Stream stream_;
};

inline SwitchingPath sample_path(const Generator& Q, double eps, int i0, double t0, double t_end,
                                 Stream stream) {
    if (!(t_end > t0)) throw InvalidSpan("sample_path requires t_end > t0");
    RegimeSampler sampler(Q, eps, i0, t0, stream);
    SwitchingPath path;
    path.m0 = Q.size();
    path.t0 = t0;
    path.t_end = t_end;
    path.states.push_back(sampler.state());
    while (sampler.next_jump() <= t_end) {
        path.jump_times.push_back(sampler.next_jump());
        sampler.jump();
        path.states.push_back(sampler.state());
    }
    return path;
}

/// Fraction of [t0, t_end] spent in each state.
inline std::vector<double> occupation_fractions(const SwitchingPath& path) {
    const double span = path.t_end - path.t0;
    if (!(span > 0.0)) throw InvalidSpan("occupation_fractions on an empty time span");
    std::vector<double> time(path.m0, 0.0);
    double t = path.t0;
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
        time[static_cast<std::size_t>(path.states[k])] += path.jump_times[k] - t;
        t = path.jump_times[k];
    }
    time[static_cast<std::size_t>(path.states.back())] += path.t_end - t;
    for (double& v : time) v /= span;
    return time;
}

} // namespace switchavg
