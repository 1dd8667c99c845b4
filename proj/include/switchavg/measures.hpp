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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "switchavg/averaging.hpp"
#include "switchavg/ctmc.hpp"
#include "switchavg/grid.hpp"
#include "switchavg/model.hpp"
#include "switchavg/parallel.hpp"
#include "switchavg/rng.hpp"
#include "switchavg/sde.hpp"

namespace switchavg {

using TestFn = std::function<double(std::span<const double> x)>;
using RegimeTestFn = std::function<double(std::span<const double> x, int regime)>;

struct NamedTestFn {
    std::string name;
    RegimeTestFn fn;
};

namespace detail {

// Time-weighted histogram over (burn_in, T] using the start state of each
// substep. Optionally tracks the time spent in a reference box.
struct MeasureAccumulator {
    GridMeasure* mu;
    double burn_in;
    double outside = 0.0;
    std::optional<Box> box;
    double in_box = 0.0;
    double total = 0.0;

    MeasureAccumulator(GridMeasure* m, double b) : mu(m), burn_in(b) {}

    void on_substep(double t, std::span<const double> x, int regime, double h) {
        const double t_end = t + h;
        if (t_end <= burn_in) return;
        const double w = t_end - std::max(t, burn_in);
        total += w;
        if (const auto cell = mu->spec.locate(x)) mu->weight(*cell, static_cast<std::size_t>(regime)) += w;
        else outside += w;
        if (box) {
            bool in = true;
            for (std::size_t a = 0; a < x.size(); ++a) in = in && x[a] >= box->lo[a] && x[a] <= box->hi[a];
            if (in) in_box += w;
        }
    }

    void finish() {
        const double overflow = outside / total;
        if (overflow > 0.01)
            throw GridCoverageError("fraction " + std::to_string(overflow) + " of post-burn-in time fell outside the grid");
        mu->normalize();
        mu->overflow = overflow;
    }
};

} // namespace detail

/// Regime-resolved occupation histogram of one long run over (burn_in, T].
/// Mass outside the grid is recorded in `overflow`; more than 1% of the
/// time outside raises GridCoverageError.
inline GridMeasure empirical_measure(const HybridModel& model, double eps, double delta, std::span<const double> x0,
                                     int i0, double T, double dt, double burn_in, const GridSpec& spec,
                                     const Stream& stream) {
    spec.validate();
    if (spec.dim() != model.dim) throw SpecMismatch("grid dimension does not match the model");
    if (!(burn_in < T) || burn_in < 0.0) throw InvalidSpan("burn_in must lie in [0, T)");
    GridMeasure mu(spec, model.regimes());
    detail::MeasureAccumulator acc(&mu, burn_in);
    integrate_hybrid(model, eps, delta, x0, i0, TimeGrid(T, dt), stream, acc);
    acc.finish();
    return mu;
}

/// sum over cells and regimes of g(center, regime) * weight.
inline double integrate_test_function(const GridMeasure& mu, const RegimeTestFn& g) {
    double acc = 0.0;
    for (std::size_t c = 0; c < mu.spec.cells(); ++c) {
        bool any = false;
        for (std::size_t r = 0; r < mu.regimes; ++r) any = any || mu.weight(c, r) != 0.0;
        if (!any) continue;
        const auto center = mu.spec.center(c);
        for (std::size_t r = 0; r < mu.regimes; ++r) {
            const double w = mu.weight(c, r);
            if (w != 0.0) acc += g(center, static_cast<int>(r)) * w;
        }
    }
    return acc;
}

/// Regime-blind variant: integrates against the cell marginal.
inline double integrate_marginal(const GridMeasure& mu, const TestFn& g) {
    double acc = 0.0;
    for (std::size_t c = 0; c < mu.spec.cells(); ++c) {
        const double w = mu.cell_weight(c);
        if (w != 0.0) acc += g(mu.spec.center(c)) * w;
    }
    return acc;
}

/// f(x) = clamp(direction . (x - offset), -1, 1): Lipschitz 1, bounded by 1.
struct ClippedRamp {
    std::vector<double> direction;
    std::vector<double> offset;

    double operator()(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) s += direction[a] * (x[a] - offset[a]);
        return std::clamp(s, -1.0, 1.0);
    }
};

/// The fixed 64-member bounded-Lipschitz family for a grid: 8 clipped
/// coordinate ramps per axis with offsets evenly spaced across the box,
/// then random unit directions with uniform offsets drawn from `seed`.
inline std::vector<ClippedRamp> bl_family(const GridSpec& spec, std::uint64_t seed, std::size_t size = 64) {
    const std::size_t d = spec.dim();
    std::vector<ClippedRamp> family;
    constexpr std::size_t per_axis = 8;
    for (std::size_t a = 0; a < d && family.size() < size; ++a)
        for (std::size_t k = 0; k < per_axis && family.size() < size; ++k) {
            ClippedRamp f{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
            f.direction[a] = 1.0;
            for (std::size_t b = 0; b < d; ++b) f.offset[b] = 0.5 * (spec.lo[b] + spec.hi[b]);
            f.offset[a] = spec.lo[a] + (static_cast<double>(k) + 0.5) * (spec.hi[a] - spec.lo[a]) / per_axis;
            family.push_back(std::move(f));
        }
    Stream rng(seed, 0, detail::fnv1a("bl-family"));
    while (family.size() < size) {
        ClippedRamp f{std::vector<double>(d), std::vector<double>(d)};
        double norm = 0.0;
        while (norm < 1e-12) {
            norm = 0.0;
            for (double& v : f.direction) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
        }
        for (double& v : f.direction) v /= norm;
        for (std::size_t b = 0; b < d; ++b) f.offset[b] = spec.lo[b] + rng.uniform() * (spec.hi[b] - spec.lo[b]);
        family.push_back(std::move(f));
    }
    return family;
}

/// max over the fixed family of |int f dmu1 - int f dmu2| on cell marginals.
inline double bl_distance(const GridMeasure& mu1, const GridMeasure& mu2, std::uint64_t family_seed = 0) {
    if (!(mu1.spec == mu2.spec)) throw SpecMismatch("bl_distance requires identical grids");
    const auto m1 = mu1.marginal(), m2 = mu2.marginal();
    std::vector<std::size_t> support;
    std::vector<double> diff;
    for (std::size_t c = 0; c < m1.size(); ++c) {
        if (m1[c] != m2[c]) {
            support.push_back(c);
            diff.push_back(m1[c] - m2[c]);
        }
    }
    if (support.empty()) return 0.0;
    std::vector<std::vector<double>> centers;
    centers.reserve(support.size());
    for (std::size_t c : support) centers.push_back(mu1.spec.center(c));

    double best = 0.0;
    for (const auto& f : bl_family(mu1.spec, family_seed)) {
        double acc = 0.0;
        for (std::size_t k = 0; k < support.size(); ++k) acc += f(centers[k]) * diff[k];
        best = std::max(best, std::abs(acc));
    }
    return best;
}

/// Mass of cells whose centers lie within `radius` of `center`, always
/// including the cell that contains `center`.
inline double neighborhood_mass(const GridMeasure& mu, std::span<const double> center, double radius) {
    const auto home = mu.spec.locate(center);
    double mass = 0.0;
    for (std::size_t c = 0; c < mu.spec.cells(); ++c) {
        const double w = mu.cell_weight(c);
        if (w == 0.0) continue;
        if ((home && *home == c) || detail::distance(mu.spec.center(c), center) <= radius) mass += w;
    }
    return mass;
}

/// max(1000, 10 periods of the cycle).
inline double default_burn_in(const LimitCycle& cycle) { return std::max(1e3, 10.0 * cycle.period); }

struct SweepConfig {
    std::vector<double> x0;
    int i0 = 0;
    double T = 2e4;
    double dt = 1e-3;
    std::optional<double> burn_in;  // default_burn_in(cycle) when empty
    std::optional<GridSpec> grid;  // default_grid(cycle) when empty
    std::uint64_t seed = 1;
    std::uint64_t bl_seed = 0;
    /// Neighbourhood radius at each critical point; when empty, 10% of the
    /// point's distance to the cycle.
    std::optional<double> neighborhood_radius;
    /// Reference box for the tightness fraction; the grid box when empty.
    std::optional<Box> tightness_box;
    std::size_t threads = 1;
};

struct ConvergenceRow {
    double eps = 0.0;
    double delta = 0.0;
    double bl_distance = 0.0;
    std::vector<double> gaps;
    std::vector<double> neighborhood_masses;
    double tightness = 0.0;
    double overflow = 0.0;
    std::string error;  // empty when the row succeeded

    bool ok() const noexcept { return error.empty(); }
};

struct ConvergenceReport {
    ScaleSchedule schedule;
    std::vector<std::string> test_functions;
    std::vector<std::vector<double>> critical_points;
    std::vector<double> radii;
    GridSpec grid;
    std::vector<ConvergenceRow> rows;  // decreasing eps
};

/// Stream for row k of a sweep.
inline Stream sweep_stream(std::uint64_t seed, std::size_t row) { return Stream(seed, row, detail::fnv1a("sweep")); }

/// For each (eps, delta) of the schedule: the empirical measure, its
/// bounded-Lipschitz distance to the cycle measure, the gaps
/// |int g dmu - cycle_average(g_bar)| with g_bar = sum_i g(., i) nu_i,
/// neighbourhood masses at the critical points, and the fraction of time
/// spent in the tightness box. A failing row records its error and the
/// sweep continues.
inline ConvergenceReport convergence_sweep(const HybridModel& model, const ScaleSchedule& schedule,
                                           const LimitCycle& cycle, const std::vector<std::vector<double>>& critical_points,
                                           const std::vector<NamedTestFn>& tests, const SweepConfig& cfg) {
    schedule.validate();
    const double burn_in = cfg.burn_in.value_or(default_burn_in(cycle));
    ConvergenceReport report;
    report.schedule = schedule;
    report.critical_points = critical_points;
    report.grid = cfg.grid ? *cfg.grid : default_grid(cycle);
    for (const auto& t : tests) report.test_functions.push_back(t.name);
    for (const auto& cp : critical_points)
        report.radii.push_back(cfg.neighborhood_radius ? *cfg.neighborhood_radius : exit_radius(cycle, cp));

    const GridMeasure mu0 = cycle_measure(cycle, report.grid);
    const StationaryDist nu = stationary_distribution(model.generator);
    std::vector<double> targets;
    for (const auto& t : tests) {
        targets.push_back(cycle_average(cycle, [&](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < nu.size(); ++i) s += nu[i] * t.fn(x, static_cast<int>(i));
            return s;
        }));
    }
    const Box box = cfg.tightness_box ? *cfg.tightness_box : Box{report.grid.lo, report.grid.hi};

    const auto points = schedule.points();
    report.rows.resize(points.size());
    parallel_for(0, points.size(), cfg.threads, [&](std::size_t k) {
        ConvergenceRow& row = report.rows[k];
        row.eps = points[k].first;
        row.delta = points[k].second;
        try {
            GridMeasure mu(report.grid, model.regimes());
            detail::MeasureAccumulator acc(&mu, burn_in);
            acc.box = box;
            if (!(burn_in < cfg.T) || burn_in < 0.0) throw InvalidSpan("burn_in must lie in [0, T)");
            integrate_hybrid(model, row.eps, row.delta, cfg.x0, cfg.i0, TimeGrid(cfg.T, cfg.dt), sweep_stream(cfg.seed, k),
                             acc);
            row.tightness = acc.in_box / acc.total;
            acc.finish();
            row.overflow = mu.overflow;
            row.bl_distance = bl_distance(mu, mu0, cfg.bl_seed);
            for (std::size_t j = 0; j < tests.size(); ++j)
                row.gaps.push_back(std::abs(integrate_test_function(mu, tests[j].fn) - targets[j]));
            for (std::size_t j = 0; j < critical_points.size(); ++j)
                row.neighborhood_masses.push_back(neighborhood_mass(mu, critical_points[j], report.radii[j]));
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return report;
}

} // namespace switchavg
