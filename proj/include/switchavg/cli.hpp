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

// Command layer behind the command-line tool. Each command writes its
// artifacts into the output directory and returns their paths.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "switchavg/averaging.hpp"
#include "switchavg/experiments.hpp"
#include "switchavg/io.hpp"
#include "switchavg/measures.hpp"
#include "switchavg/predprey.hpp"
#include "switchavg/rng.hpp"
#include "switchavg/scenario.hpp"
#include "switchavg/sde.hpp"

namespace switchavg::cli {

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"simulate", "invariant", "average", "cycle",
                                                "exit-time", "converge", "reproduce-example"};
    return names;
}

/// File names written by reproduce-example, in order.
inline const std::array<std::string, 7>& reproduce_files() {
    static const std::array<std::string, 7> names{
        "trajectory_eps0.01_delta0.01.csv", "trajectory_eps0.001_delta0.001.csv", "averaged_trajectory.csv",
        "limit_cycle.csv",                  "period.txt",                         "critical_points.csv",
        "scenario.json"};
    return names;
}

struct RunOptions {
    std::size_t threads = 1;
    std::ostream* log = nullptr;
};

namespace detail {

inline std::uint64_t command_tag(const std::string& command) { return switchavg::detail::fnv1a(command); }

inline Stream command_stream(const Scenario& s, const std::string& command, std::size_t replicate = 0) {
    return Stream(s.simulation.seed, replicate, command_tag(command));
}

inline Trajectory subsample(const Trajectory& tr, std::size_t every) {
    if (every <= 1) return tr;
    Trajectory out;
    out.dim = tr.dim;
    out.meta = tr.meta;
    for (std::size_t k = 0; k < tr.size(); ++k)
        if (k % every == 0 || k + 1 == tr.size()) out.push(tr.times[k], tr.state(k), tr.regimes[k]);
    return out;
}

inline LimitCycle find_cycle(const Scenario& s, const VectorField& field) {
    CycleOptions opts;
    opts.dt = s.cycle.dt;
    opts.closure_tol = s.cycle.closure_tol;
    opts.max_time = s.cycle.max_time;
    opts.samples = s.cycle.samples;
    return detect_limit_cycle(field, s.cycle.x0, s.cycle.transient, opts);
}

inline GridSpec grid_for(const Scenario& s, const LimitCycle& cycle) { return s.grid ? *s.grid : default_grid(cycle); }

/// Critical points strictly inside the positive quadrant, searched over
/// the grid box clipped to x, y > 0.
inline std::vector<CriticalPoint> interior_critical_points(const VectorField& field, const GridSpec& grid) {
    Box box{grid.lo, grid.hi};
    for (double& v : box.lo) v = std::max(v, 1e-3);
    auto found = find_critical_points(field, box, 40, 1e-10);
    std::vector<CriticalPoint> out;
    for (auto& cp : found.points)
        if (cp.location[0] > 1e-6 && cp.location[1] > 1e-6) out.push_back(std::move(cp));
    return out;
}

inline std::string path_in(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
}

inline void write_critical_points(std::ostream& os, const std::vector<CriticalPoint>& cps) {
    os << "x1,x2,residual,stability,eig1_re,eig1_im,eig2_re,eig2_im\n";
    for (const auto& cp : cps) {
        os << io::num(cp.location[0]) << ',' << io::num(cp.location[1]) << ',' << io::num(cp.residual) << ','
           << to_string(cp.stability);
        for (const auto& ev : cp.eigenvalues) os << ',' << io::num(ev.real()) << ',' << io::num(ev.imag());
        os << '\n';
    }
}

// Short label for file names, e.g. 0.01 -> "0.01".
inline std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace detail

/// Runs one command; returns the written files.
inline std::vector<std::string> execute(const Scenario& s, const std::string& command, const RunOptions& run = {}) {
    namespace fs = std::filesystem;
    using namespace detail;
    fs::create_directories(s.output_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name) {
        written.push_back(path_in(s.output_dir, name));
        return written.back();
    };
    auto log = [&](const std::string& line) {
        if (run.log) *run.log << line << '\n';
    };
    const HybridModel model = s.model();
    const auto& sim = s.simulation;

    if (command == "simulate") {
        SimOptions so{sim.record_every};
        const auto tr = simulate(model, sim.eps, sim.delta, sim.x0, sim.i0, sim.T, sim.dt, command_stream(s, command), so);
        io::write_file(emit("trajectory.csv"), io::write_trajectory, tr);
    } else if (command == "average") {
        const VectorField field = s.averaged_field();
        const auto tr = subsample(integrate_ode(field, sim.x0, sim.T, sim.dt), sim.record_every);
        io::write_file(emit("averaged_trajectory.csv"), io::write_trajectory, tr);
        // Field samples on a 41x41 lattice over the trajectory's bounding box.
        std::array<double, 2> lo{tr.at(0, 0), tr.at(0, 1)}, hi = lo;
        for (std::size_t k = 0; k < tr.size(); ++k)
            for (std::size_t a = 0; a < 2; ++a) {
                lo[a] = std::min(lo[a], tr.at(k, a));
                hi[a] = std::max(hi[a], tr.at(k, a));
            }
        std::ofstream out(emit("averaged_field.csv"), std::ios::binary);
        out << "x1,x2,f1,f2\n";
        constexpr int m = 40;
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j) {
                const std::vector<double> z{lo[0] + (hi[0] - lo[0]) * i / m, lo[1] + (hi[1] - lo[1]) * j / m};
                const auto f = field(z);
                out << io::num(z[0]) << ',' << io::num(z[1]) << ',' << io::num(f[0]) << ',' << io::num(f[1]) << '\n';
            }
    } else if (command == "cycle") {
        const auto cyc = find_cycle(s, s.averaged_field());
        io::write_file(emit("limit_cycle.csv"), io::write_cycle, cyc);
        write_text(emit("period.txt"), io::num(cyc.period) + "\n");
        log("period " + io::num(cyc.period));
    } else if (command == "invariant") {
        const auto cyc = find_cycle(s, averaged_predprey(s.params, stationary_distribution(model.generator)));
        const GridSpec grid = grid_for(s, cyc);
        const double burn_in = s.long_run.burn_in.value_or(default_burn_in(cyc));
        io::write_file(emit("cycle_measure.gm"), io::write_measure, cycle_measure(cyc, grid));
        const auto points = s.schedule.points();
        std::vector<GridMeasure> measures(points.size());
        parallel_for(0, points.size(), run.threads, [&](std::size_t k) {
            measures[k] = empirical_measure(model, points[k].first, points[k].second, sim.x0, sim.i0, s.long_run.T,
                                            s.long_run.dt, burn_in, grid, command_stream(s, command, k));
        });
        for (std::size_t k = 0; k < points.size(); ++k)
            io::write_file(emit("measure_eps" + tag(points[k].first) + "_delta" + tag(points[k].second) + ".gm"),
                           io::write_measure, measures[k]);
    } else if (command == "exit-time") {
        const VectorField avg = averaged_predprey(s.params, stationary_distribution(model.generator));
        std::vector<double> center;
        std::optional<LimitCycle> cyc;
        if (s.exit.center) {
            center = *s.exit.center;
        } else {
            cyc = find_cycle(s, avg);
            const auto cps = interior_critical_points(avg, grid_for(s, *cyc));
            if (cps.empty()) throw Error("no interior critical point found for the exit-time experiment");
            center = cps.front().location;
        }
        double radius = 0.0;
        if (s.exit.radius) {
            radius = *s.exit.radius;
        } else {
            if (!cyc) cyc = find_cycle(s, avg);
            radius = exit_radius(*cyc, center);
        }
        const double budget = exit_budget(s.schedule.kind, s.exit.eps, s.exit.delta, s.exit.H, s.exit.Delta);
        const auto stats = exit_time_experiment(model, s.exit.eps, s.exit.delta, center, radius, budget, s.exit.dt,
                                                s.exit.n, {s.simulation.seed ^ command_tag(command), run.threads});
        io::write_file(emit("exit_times.csv"), io::write_exit_times, stats);
        log("fraction_exited " + io::num(stats.fraction_exited) + " budget " + io::num(budget) + " radius " +
            io::num(radius));
    } else if (command == "converge") {
        const VectorField avg = averaged_predprey(s.params, stationary_distribution(model.generator));
        const auto cyc = find_cycle(s, avg);
        const GridSpec grid = grid_for(s, cyc);
        std::vector<std::vector<double>> cps;
        for (const auto& cp : interior_critical_points(avg, grid)) cps.push_back(cp.location);
        if (s.exit.center) cps.push_back(*s.exit.center);
        std::vector<NamedTestFn> tests;
        for (const auto& name : s.test_functions) tests.push_back(named_test_function(name));
        SweepConfig cfg;
        cfg.x0 = sim.x0;
        cfg.i0 = sim.i0;
        cfg.T = s.long_run.T;
        cfg.dt = s.long_run.dt;
        cfg.burn_in = s.long_run.burn_in;
        cfg.grid = grid;
        cfg.seed = s.simulation.seed ^ command_tag(command);
        cfg.neighborhood_radius = s.exit.radius;
        cfg.threads = run.threads;
        const auto rep = convergence_sweep(model, s.schedule, cyc, cps, tests, cfg);
        io::write_file(emit("convergence.csv"), io::write_convergence, rep);
    } else if (command == "reproduce-example") {
        const auto& names = reproduce_files();
        const std::array<double, 2> levels{0.01, 0.001};
        SimOptions so{sim.record_every};
        std::vector<Trajectory> paths(levels.size());
        parallel_for(0, levels.size(), run.threads, [&](std::size_t k) {
            paths[k] = simulate(model, levels[k], levels[k], sim.x0, sim.i0, sim.T, sim.dt, command_stream(s, command, k), so);
        });
        io::write_file(emit(names[0]), io::write_trajectory, paths[0]);
        io::write_file(emit(names[1]), io::write_trajectory, paths[1]);
        const VectorField field = s.averaged_field();
        io::write_file(emit(names[2]), io::write_trajectory, subsample(integrate_ode(field, sim.x0, sim.T, sim.dt), sim.record_every));
        const auto cyc = find_cycle(s, field);
        io::write_file(emit(names[3]), io::write_cycle, cyc);
        write_text(emit(names[4]), io::num(cyc.period) + "\n");
        io::write_file(emit(names[5]), write_critical_points, interior_critical_points(field, grid_for(s, cyc)));
        write_text(emit(names[6]), to_json(s).dump(2) + "\n");
    } else {
        throw ConfigError("command", "unknown command '" + command + "'");
    }
    return written;
}

} // namespace switchavg::cli
