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

// Stochastic predator-prey family with regime switching:
//   dX = X (a - b X - Y h) dt + sqrt(delta) lambda X dW1
//   dY = Y (-c - d Y + f X h) dt + sqrt(delta) rho Y dW2
// with h(x, y, i) = m1 / (m2 + m3 x + m4 y).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "switchavg/averaging.hpp"
#include "switchavg/ctmc.hpp"
#include "switchavg/errors.hpp"
#include "switchavg/model.hpp"

namespace switchavg {

enum class ResponseKind { constant, holling2, beddington_deangelis };

inline std::string to_string(ResponseKind k) {
    switch (k) {
    case ResponseKind::constant: return "constant";
    case ResponseKind::holling2: return "holling2";
    case ResponseKind::beddington_deangelis: return "beddington-deangelis";
    }
    return "?";
}

/// Per-regime h(x, y, i) = m1 / (m2 + m3 x + m4 y). Constant m is
/// (m, 1, 0, 0); Holling type II m/(a + b x) is (m, a, b, 0).
struct FunctionalResponse {
    ResponseKind kind = ResponseKind::constant;
    std::vector<double> m1, m2, m3, m4;

    static FunctionalResponse constant(std::vector<double> m) {
        const std::size_t n = m.size();
        return {ResponseKind::constant, std::move(m), std::vector<double>(n, 1.0), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0)};
    }
    static FunctionalResponse holling2(std::vector<double> m, std::vector<double> a, std::vector<double> b) {
        const std::size_t n = m.size();
        return {ResponseKind::holling2, std::move(m), std::move(a), std::move(b), std::vector<double>(n, 0.0)};
    }
    static FunctionalResponse beddington_deangelis(std::vector<double> m1, std::vector<double> m2,
                                                   std::vector<double> m3, std::vector<double> m4) {
        return {ResponseKind::beddington_deangelis, std::move(m1), std::move(m2), std::move(m3), std::move(m4)};
    }

    double operator()(double x, double y, std::size_t i) const { return m1[i] / (m2[i] + m3[i] * x + m4[i] * y); }

    /// h > 0 and bounded on the closed positive quadrant iff m1, m2 > 0 and
    /// m3, m4 >= 0 (the denominator is then at least m2).
    void validate(std::size_t regimes) const {
        for (const auto* v : {&m1, &m2, &m3, &m4})
            if (v->size() != regimes) throw InvalidModel("functional response needs one coefficient per regime");
        for (std::size_t i = 0; i < regimes; ++i) {
            if (!(m1[i] > 0.0) || !(m2[i] > 0.0)) throw InvalidModel("functional response numerator/offset must be positive");
            if (!(m3[i] >= 0.0) || !(m4[i] >= 0.0)) throw InvalidModel("functional response slopes must be non-negative");
            if (kind == ResponseKind::constant && (m3[i] != 0.0 || m4[i] != 0.0 || m2[i] != 1.0))
                throw InvalidModel("constant response must have unit denominator");
            if (kind == ResponseKind::holling2 && m4[i] != 0.0) throw InvalidModel("Holling II response has no predator term");
        }
    }

    bool operator==(const FunctionalResponse&) const = default;
};

struct PredPreyParams {
    std::vector<double> a, b, c, d, f;  // rates per regime
    std::vector<double> lambda, rho;    // noise intensities per regime
    FunctionalResponse response;

    std::size_t regimes() const noexcept { return a.size(); }

    void validate() const {
        const std::size_t m = regimes();
        if (m == 0) throw InvalidModel("predator-prey parameters need at least one regime");
        for (const auto* v : {&a, &b, &c, &d, &f, &lambda, &rho}) {
            if (v->size() != m) throw InvalidModel("predator-prey parameter vectors differ in length");
            for (double x : *v)
                if (!(x > 0.0) || !std::isfinite(x)) throw InvalidModel("predator-prey parameters must be positive");
        }
        response.validate(m);
    }

    bool operator==(const PredPreyParams&) const = default;
};

inline HybridModel build_model(const PredPreyParams& p, const Generator& Q, std::string name = "predprey") {
    p.validate();
    if (Q.size() != p.regimes()) throw InvalidModel("generator size does not match the parameter regimes");
    HybridModel m;
    m.name = std::move(name);
    m.dim = 2;
    m.brownian_dim = 2;
    m.generator = Q;
    m.positive = {true, true};
    m.drift = [p](std::span<const double> z, int regime, std::span<double> out) {
        const auto i = static_cast<std::size_t>(regime);
        const double x = z[0], y = z[1];
        const double h = p.response(x, y, i);
        out[0] = x * (p.a[i] - p.b[i] * x - y * h);
        out[1] = y * (-p.c[i] - p.d[i] * y + p.f[i] * x * h);
    };
    m.diffusion = [p](std::span<const double> z, int regime, std::span<double> out) {
        const auto i = static_cast<std::size_t>(regime);
        out[0] = p.lambda[i] * z[0];
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = p.rho[i] * z[1];
    };
    validate_model(m);
    return m;
}

/// x [a_bar - b_bar x - y h1], y [-c_bar - d_bar y + x h2] with
/// h1 = sum h(., i) nu_i and h2 = sum f(i) h(., i) nu_i.
inline VectorField averaged_predprey(const PredPreyParams& p, const StationaryDist& nu) {
    p.validate();
    if (nu.size() != p.regimes()) throw InvalidModel("stationary distribution size does not match regimes");
    auto bar = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * nu[i];
        return s;
    };
    VectorField field;
    field.dim = 2;
    field.eval = [p, w = nu.nu, a = bar(p.a), b = bar(p.b), c = bar(p.c), d = bar(p.d)](std::span<const double> z,
                                                                                       std::span<double> out) {
        const double x = z[0], y = z[1];
        double h1 = 0.0, h2 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double h = p.response(x, y, i);
            h1 += h * w[i];
            h2 += p.f[i] * h * w[i];
        }
        out[0] = x * (a - b * x - y * h1);
        out[1] = y * (-c - d * y + x * h2);
    };
    return field;
}

/// Time-weighted diagnostics of a positive planar trajectory over a window.
struct MomentDiagnostics {
    double mean_square_norm = 0.0;  // (1/|window|) int |Z|^2 dt
    double sup_square_norm = 0.0;   // running sup of |Z(t)|^2
    double box_fraction = 0.0;      // fraction of time in [1/L, L]^2
};

struct TimeWindow {
    double begin = 0.0;
    double end = std::numeric_limits<double>::infinity();
};

/// Left-point rule: sample k stands for [t_k, t_{k+1}).
inline MomentDiagnostics moment_diagnostics(const Trajectory& traj, double L, TimeWindow window = {}) {
    if (traj.dim != 2) throw InvalidTrajectory("moment diagnostics need a planar trajectory");
    if (!(L > 1.0)) throw InvalidTrajectory("box parameter L must exceed 1");
    for (double v : traj.states)
        if (!(v > 0.0)) throw InvalidTrajectory("trajectory leaves the open positive quadrant");
    MomentDiagnostics out;
    double total = 0.0, sq = 0.0, in_box = 0.0;
    const std::size_t n = traj.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = traj.times[k];
        const double next = k + 1 < n ? traj.times[k + 1] : t;
        const double x = traj.at(k, 0), y = traj.at(k, 1);
        const double r2 = x * x + y * y;
        if (t >= window.begin && t <= window.end) out.sup_square_norm = std::max(out.sup_square_norm, r2);
        const double w = std::max(0.0, std::min(next, window.end) - std::max(t, window.begin));
        if (w <= 0.0) continue;
        total += w;
        sq += w * r2;
        if (x >= 1.0 / L && x <= L && y >= 1.0 / L && y <= L) in_box += w;
    }
    if (total > 0.0) {
        out.mean_square_norm = sq / total;
        out.box_fraction = in_box / total;
    } else if (n == 1) {
        // A single sample carries no duration; report its values.
        const double x = traj.at(0, 0), y = traj.at(0, 1);
        out.mean_square_norm = x * x + y * y;
        out.box_fraction = (x >= 1.0 / L && x <= L && y >= 1.0 / L && y <= L) ? 1.0 : 0.0;
    }
    return out;
}

/// The Holling-type switching example as tabulated: logistic prey with
/// growth r and capacity K, Holling II predation m x y / (a + b x),
/// predator death d, conversion e and self-limitation f.
struct HollingTable {
    std::vector<double> r{0.9, 1.1};
    std::vector<double> K{4.737, 5.238};
    std::vector<double> m{1.2, 0.8};
    std::vector<double> a{1.0, 1.0};
    std::vector<double> b{1.0, 1.0};
    std::vector<double> d{0.85, 1.15};
    std::vector<double> e{1.5, 2.0};
    std::vector<double> f{0.03, 0.01};
    std::vector<double> lambda{1.0, 2.0};
    std::vector<double> rho{3.0, 1.0};
    std::vector<std::vector<double>> Q{{-1.0, 1.0}, {1.0, -1.0}};

    /// Map onto the general family: a = r, b = r/K, c = d, d = f, f = e,
    /// h = m / (a + b x).
    PredPreyParams params() const {
        PredPreyParams p;
        for (std::size_t i = 0; i < r.size(); ++i) {
            p.a.push_back(r[i]);
            p.b.push_back(r[i] / K[i]);
            p.c.push_back(d[i]);
            p.d.push_back(f[i]);
            p.f.push_back(e[i]);
        }
        p.lambda = lambda;
        p.rho = rho;
        p.response = FunctionalResponse::holling2(m, a, b);
        return p;
    }
};

/// Tabulated averaged field, with predator equation
/// y (-1 + 1.6 x/(1+x) - 0.02 y). With a minus sign on the 1.6 term there
/// would be no interior equilibrium near (1.836, 1.795).
inline VectorField holling_reference_field() {
    VectorField field;
    field.dim = 2;
    field.eval = [](std::span<const double> z, std::span<double> out) {
        const double x = z[0], y = z[1];
        out[0] = x * (1.0 - x / 5.0) - x * y / (1.0 + x);
        out[1] = y * (-1.0 + 1.6 * x / (1.0 + x) - 0.02 * y);
    };
    return field;
}

struct HollingExample {
    HollingTable table;
    PredPreyParams params;
    Generator generator{{{0.0}}};
    HybridModel model;
    /// The tabulated averaged field (reference for regression checks).
    VectorField reference_field;
    /// The averaged field built from the per-regime components.
    VectorField component_field;
    std::vector<double> reference_equilibrium{1.836, 1.795};
    /// Coefficient of x/(1+x) in the averaged predator equation: tabulated
    /// value vs the nu-average of e(i) m(i) over the table.
    double reference_conversion = 1.6;
    double component_conversion = 0.0;
    ScaleSchedule schedule{ScaleCase::case1, 1.0, {0.1, 0.01, 0.001}};
    std::vector<double> x0{1.0, 1.0};
};

inline HollingExample holling_example() {
    HollingExample ex;
    ex.params = ex.table.params();
    ex.generator = Generator(ex.table.Q);
    ex.model = build_model(ex.params, ex.generator, "holling-example");
    ex.reference_field = holling_reference_field();
    const StationaryDist nu = stationary_distribution(ex.generator);
    ex.component_field = averaged_predprey(ex.params, nu);
    for (std::size_t i = 0; i < nu.size(); ++i) ex.component_conversion += nu[i] * ex.table.e[i] * ex.table.m[i];
    return ex;
}

} // namespace switchavg
