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

// Scenario configuration: one JSON document describing the model, the
// switching generator, the (eps, delta) schedule and every experiment's
// settings. parse_config fills defaults; to_json echoes the full scenario
// so that parse(to_json(s)) == s.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchavg/averaging.hpp"
#include "switchavg/ctmc.hpp"
#include "switchavg/errors.hpp"
#include "switchavg/grid.hpp"
#include "switchavg/measures.hpp"
#include "switchavg/model.hpp"
#include "switchavg/predprey.hpp"

namespace switchavg {

inline constexpr const char* kHollingBuiltin = "holling-example";

struct SimulationConfig {
    double eps = 0.01;
    double delta = 0.01;
    double T = 100.0;
    double dt = 1e-3;
    std::size_t record_every = 10;
    std::vector<double> x0{1.0, 1.0};
    int i0 = 0;
    std::size_t n = 200;
    std::uint64_t seed = 1;

    bool operator==(const SimulationConfig&) const = default;
};

struct LongRunConfig {
    double T = 2e4;
    std::optional<double> burn_in;  // max(1000, 10 cycle periods) when empty
    double dt = 1e-3;

    bool operator==(const LongRunConfig&) const = default;
};

struct CycleConfig {
    std::vector<double> x0{1.0, 1.0};
    double transient = 100.0;
    double dt = 1e-3;
    double closure_tol = 1e-6;
    double max_time = 1e4;
    std::size_t samples = 2000;

    bool operator==(const CycleConfig&) const = default;
};

struct ExitConfig {
    std::optional<std::vector<double>> center;  // first interior critical point when empty
    std::optional<double> radius;               // 10% of distance to the cycle when empty
    double eps = 0.01;
    double delta = 0.01;
    double H = 10.0;
    double Delta = 0.01;
    double dt = 1e-3;
    std::size_t n = 200;

    bool operator==(const ExitConfig&) const = default;
};

enum class AveragedChoice { component, reference };

struct Scenario {
    std::string model_name = kHollingBuiltin;
    bool builtin = true;
    PredPreyParams params;
    std::vector<std::vector<double>> generator;
    ScaleSchedule schedule;
    SimulationConfig simulation;
    LongRunConfig long_run;
    CycleConfig cycle;
    ExitConfig exit;
    std::optional<GridSpec> grid;
    std::vector<std::string> test_functions{"x", "y", "x2", "xy"};
    /// Which averaged field drives `average`, `cycle` and the figures:
    /// the one built from the model's components, or the tabulated
    /// reference (builtin only).
    AveragedChoice averaged = AveragedChoice::component;
    std::string output_dir = "out";

    bool operator==(const Scenario&) const = default;

    HybridModel model() const { return build_model(params, Generator(generator), model_name); }

    VectorField averaged_field() const {
        if (averaged == AveragedChoice::reference) return holling_reference_field();
        return averaged_predprey(params, stationary_distribution(Generator(generator)));
    }
};

/// Test functions available by name for planar models.
inline NamedTestFn named_test_function(const std::string& name) {
    if (name == "x") return {name, [](std::span<const double> z, int) { return z[0]; }};
    if (name == "y") return {name, [](std::span<const double> z, int) { return z[1]; }};
    if (name == "x2") return {name, [](std::span<const double> z, int) { return z[0] * z[0]; }};
    if (name == "y2") return {name, [](std::span<const double> z, int) { return z[1] * z[1]; }};
    if (name == "xy") return {name, [](std::span<const double> z, int) { return z[0] * z[1]; }};
    if (name == "one") return {name, [](std::span<const double>, int) { return 1.0; }};
    throw ConfigError("test_functions", "unknown test function '" + name + "'");
}

namespace detail {

using json = nlohmann::ordered_json;

template <class T>
T get_or(const json& j, const char* key, const T& fallback, const std::string& path) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

template <class T>
T require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) throw ConfigError(path + key, "missing required key");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

inline json response_to_json(const FunctionalResponse& r) {
    json j;
    j["kind"] = to_string(r.kind);
    switch (r.kind) {
    case ResponseKind::constant: j["m"] = r.m1; break;
    case ResponseKind::holling2:
        j["m"] = r.m1;
        j["a"] = r.m2;
        j["b"] = r.m3;
        break;
    case ResponseKind::beddington_deangelis:
        j["m1"] = r.m1;
        j["m2"] = r.m2;
        j["m3"] = r.m3;
        j["m4"] = r.m4;
        break;
    }
    return j;
}

inline FunctionalResponse response_from_json(const json& j) {
    const std::string p = "model.predprey.response.";
    const auto kind = require<std::string>(j, "kind", p);
    using V = std::vector<double>;
    if (kind == "constant") return FunctionalResponse::constant(require<V>(j, "m", p));
    if (kind == "holling2")
        return FunctionalResponse::holling2(require<V>(j, "m", p), require<V>(j, "a", p), require<V>(j, "b", p));
    if (kind == "beddington-deangelis")
        return FunctionalResponse::beddington_deangelis(require<V>(j, "m1", p), require<V>(j, "m2", p),
                                                        require<V>(j, "m3", p), require<V>(j, "m4", p));
    throw ConfigError(p + "kind", "unknown response kind '" + kind + "'");
}

inline json params_to_json(const PredPreyParams& p) {
    json j;
    j["a"] = p.a;
    j["b"] = p.b;
    j["c"] = p.c;
    j["d"] = p.d;
    j["f"] = p.f;
    j["lambda"] = p.lambda;
    j["rho"] = p.rho;
    j["response"] = response_to_json(p.response);
    return j;
}

inline PredPreyParams params_from_json(const json& j) {
    const std::string p = "model.predprey.";
    using V = std::vector<double>;
    PredPreyParams out;
    out.a = require<V>(j, "a", p);
    out.b = require<V>(j, "b", p);
    out.c = require<V>(j, "c", p);
    out.d = require<V>(j, "d", p);
    out.f = require<V>(j, "f", p);
    out.lambda = require<V>(j, "lambda", p);
    out.rho = require<V>(j, "rho", p);
    if (!j.contains("response")) throw ConfigError(p + "response", "missing required key");
    out.response = response_from_json(j.at("response"));
    return out;
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace detail

/// Full scenario as JSON, with every default made explicit.
inline nlohmann::ordered_json to_json(const Scenario& s) {
    using detail::json;
    json j;
    if (s.builtin) {
        j["model"]["builtin"] = s.model_name;
    } else {
        j["model"]["name"] = s.model_name;
    }
    j["model"]["predprey"] = detail::params_to_json(s.params);
    j["generator"] = s.generator;
    j["schedule"] = {{"case", to_string(s.schedule.kind)}, {"l", s.schedule.l}, {"eps", s.schedule.eps}};
    const auto& sim = s.simulation;
    j["simulation"] = {{"eps", sim.eps},   {"delta", sim.delta},         {"T", sim.T},   {"dt", sim.dt},
                       {"record_every", sim.record_every}, {"x0", sim.x0}, {"i0", sim.i0}, {"n", sim.n},
                       {"seed", sim.seed}};
    j["long_run"] = {{"T", s.long_run.T}, {"burn_in", detail::optional_json(s.long_run.burn_in)}, {"dt", s.long_run.dt}};
    const auto& c = s.cycle;
    j["cycle"] = {{"x0", c.x0},           {"transient", c.transient}, {"dt", c.dt},
                  {"closure_tol", c.closure_tol}, {"max_time", c.max_time}, {"samples", c.samples}};
    const auto& e = s.exit;
    j["exit"] = {{"center", detail::optional_json(e.center)},
                 {"radius", detail::optional_json(e.radius)},
                 {"eps", e.eps},
                 {"delta", e.delta},
                 {"H", e.H},
                 {"Delta", e.Delta},
                 {"dt", e.dt},
                 {"n", e.n}};
    if (s.grid) j["grid"] = {{"lo", s.grid->lo}, {"hi", s.grid->hi}, {"n", s.grid->n}};
    else j["grid"] = nullptr;
    j["test_functions"] = s.test_functions;
    j["averaged_field"] = s.averaged == AveragedChoice::reference ? "reference" : "component";
    j["output_dir"] = s.output_dir;
    return j;
}

/// Defaults of the builtin Holling example.
inline Scenario holling_scenario() {
    const HollingExample ex = holling_example();
    Scenario s;
    s.model_name = kHollingBuiltin;
    s.builtin = true;
    s.params = ex.params;
    s.generator = ex.table.Q;
    s.schedule = ex.schedule;
    s.exit.center = ex.reference_equilibrium;
    s.exit.radius = 0.2;
    // Noisy runs at eps = delta >= 0.01 spread far beyond the cycle and
    // toward the prey axis, so the example histograms on [0, 20]^2.
    s.grid = GridSpec{{0.0, 0.0}, {20.0, 20.0}, 200};
    return s;
}

/// The exact configuration file the builtin example represents.
inline std::string holling_example_config() { return to_json(holling_scenario()).dump(2) + "\n"; }

inline Scenario parse_config_json(const nlohmann::ordered_json& j) {
    using detail::get_or;
    using detail::json;
    using detail::require;
    using V = std::vector<double>;
    if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    if (!j.contains("model") || !j.at("model").is_object()) throw ConfigError("model", "missing required key");
    const json& model = j.at("model");

    Scenario s;
    if (model.contains("builtin")) {
        const auto name = require<std::string>(model, "builtin", "model.");
        if (name != kHollingBuiltin) throw ConfigError("model.builtin", "unknown builtin '" + name + "'");
        s = holling_scenario();
        if (model.contains("predprey")) s.params = detail::params_from_json(model.at("predprey"));
        s.generator = get_or<std::vector<V>>(j, "generator", s.generator, "");
    } else {
        if (!model.contains("predprey")) throw ConfigError("model.predprey", "missing required key");
        s.builtin = false;
        s.model_name = get_or<std::string>(model, "name", "predprey", "model.");
        s.params = detail::params_from_json(model.at("predprey"));
        s.generator = require<std::vector<V>>(j, "generator", "");
        s.exit.center.reset();
        s.exit.radius.reset();
    }
    try {
        const Generator Q(s.generator);
        if (Q.size() != s.params.regimes()) throw ConfigError("generator", "size does not match the model regimes");
        s.params.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidModel& e) {
        throw ConfigError("model.predprey", e.what());
    } catch (const Error& e) {
        throw ConfigError("generator", e.what());
    }

    if (j.contains("schedule") && !j.at("schedule").is_null()) {
        const json& sch = j.at("schedule");
        const auto label = get_or<std::string>(sch, "case", to_string(s.schedule.kind), "schedule.");
        if (label == "case1") s.schedule.kind = ScaleCase::case1;
        else if (label == "case2") s.schedule.kind = ScaleCase::case2;
        else if (label == "case3") s.schedule.kind = ScaleCase::case3;
        else throw ConfigError("schedule.case", "unknown case label '" + label + "'");
        s.schedule.l = get_or<double>(sch, "l", s.schedule.l, "schedule.");
        s.schedule.eps = get_or<V>(sch, "eps", s.schedule.eps, "schedule.");
    }
    try {
        s.schedule.validate();
    } catch (const InvalidSchedule& e) {
        throw ConfigError("schedule", e.what());
    }

    auto& sim = s.simulation;
    const json sj = j.value("simulation", json::object());
    sim.eps = get_or<double>(sj, "eps", sim.eps, "simulation.");
    sim.delta = get_or<double>(sj, "delta", s.schedule.delta_of(sim.eps), "simulation.");
    sim.T = get_or<double>(sj, "T", sim.T, "simulation.");
    sim.dt = get_or<double>(sj, "dt", sim.dt, "simulation.");
    sim.record_every = get_or<std::size_t>(sj, "record_every", sim.record_every, "simulation.");
    sim.x0 = get_or<V>(sj, "x0", sim.x0, "simulation.");
    sim.i0 = get_or<int>(sj, "i0", sim.i0, "simulation.");
    sim.n = get_or<std::size_t>(sj, "n", sim.n, "simulation.");
    sim.seed = get_or<std::uint64_t>(sj, "seed", sim.seed, "simulation.");
    if (!(sim.eps > 0.0)) throw ConfigError("simulation.eps", "must be positive");
    if (!(sim.delta >= 0.0)) throw ConfigError("simulation.delta", "must be non-negative");
    if (!(sim.dt > 0.0) || !(sim.T >= sim.dt)) throw ConfigError("simulation.dt", "need 0 < dt <= T");
    if (sim.x0.size() != 2 || !(sim.x0[0] > 0.0) || !(sim.x0[1] > 0.0))
        throw ConfigError("simulation.x0", "must be a positive planar point");
    if (sim.i0 < 0 || static_cast<std::size_t>(sim.i0) >= s.params.regimes())
        throw ConfigError("simulation.i0", "regime out of range");
    if (sim.n == 0 || sim.record_every == 0) throw ConfigError("simulation.n", "counts must be positive");

    const json lj = j.value("long_run", json::object());
    s.long_run.T = get_or<double>(lj, "T", s.long_run.T, "long_run.");
    if (lj.contains("burn_in"))
        s.long_run.burn_in = lj.at("burn_in").is_null()
                                 ? std::nullopt
                                 : std::optional<double>(get_or<double>(lj, "burn_in", 0.0, "long_run."));
    s.long_run.dt = get_or<double>(lj, "dt", s.long_run.dt, "long_run.");
    if (s.long_run.burn_in && !(*s.long_run.burn_in >= 0.0 && *s.long_run.burn_in < s.long_run.T))
        throw ConfigError("long_run.burn_in", "need 0 <= burn_in < T");
    if (!(s.long_run.dt > 0.0)) throw ConfigError("long_run.dt", "must be positive");

    const json cj = j.value("cycle", json::object());
    s.cycle.x0 = get_or<V>(cj, "x0", s.cycle.x0, "cycle.");
    s.cycle.transient = get_or<double>(cj, "transient", s.cycle.transient, "cycle.");
    s.cycle.dt = get_or<double>(cj, "dt", s.cycle.dt, "cycle.");
    s.cycle.closure_tol = get_or<double>(cj, "closure_tol", s.cycle.closure_tol, "cycle.");
    s.cycle.max_time = get_or<double>(cj, "max_time", s.cycle.max_time, "cycle.");
    s.cycle.samples = get_or<std::size_t>(cj, "samples", s.cycle.samples, "cycle.");
    if (s.cycle.x0.size() != 2) throw ConfigError("cycle.x0", "must be a planar point");

    const json ej = j.value("exit", json::object());
    if (ej.contains("center"))
        s.exit.center = ej.at("center").is_null() ? std::nullopt : std::optional<V>(get_or<V>(ej, "center", {}, "exit."));
    if (ej.contains("radius"))
        s.exit.radius = ej.at("radius").is_null() ? std::nullopt
                                                  : std::optional<double>(get_or<double>(ej, "radius", 0.0, "exit."));
    s.exit.eps = get_or<double>(ej, "eps", s.exit.eps, "exit.");
    s.exit.delta = get_or<double>(ej, "delta", s.exit.delta, "exit.");
    s.exit.H = get_or<double>(ej, "H", s.exit.H, "exit.");
    s.exit.Delta = get_or<double>(ej, "Delta", s.exit.Delta, "exit.");
    s.exit.dt = get_or<double>(ej, "dt", s.exit.dt, "exit.");
    s.exit.n = get_or<std::size_t>(ej, "n", s.exit.n, "exit.");
    if (s.exit.center && s.exit.center->size() != 2) throw ConfigError("exit.center", "must be a planar point");
    if (s.exit.radius && !(*s.exit.radius > 0.0)) throw ConfigError("exit.radius", "must be positive");

    if (j.contains("grid") && !j.at("grid").is_null()) {
        const json& g = j.at("grid");
        GridSpec spec{require<V>(g, "lo", "grid."), require<V>(g, "hi", "grid."), require<std::size_t>(g, "n", "grid.")};
        try {
            spec.validate();
        } catch (const Error& e) {
            throw ConfigError("grid", e.what());
        }
        if (spec.dim() != 2) throw ConfigError("grid", "grid must be planar");
        s.grid = spec;
    } else if (j.contains("grid")) {
        s.grid.reset();
    }

    s.test_functions = get_or<std::vector<std::string>>(j, "test_functions", s.test_functions, "");
    for (const auto& name : s.test_functions) (void)named_test_function(name);

    const auto avg = get_or<std::string>(j, "averaged_field", "component", "");
    if (avg == "component") s.averaged = AveragedChoice::component;
    else if (avg == "reference") {
        if (!s.builtin) throw ConfigError("averaged_field", "the reference field exists only for the builtin example");
        s.averaged = AveragedChoice::reference;
    } else throw ConfigError("averaged_field", "expected 'component' or 'reference'");

    s.output_dir = get_or<std::string>(j, "output_dir", s.output_dir, "");
    return s;
}

inline Scenario parse_config_text(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("<document>", e.what());
    }
    return parse_config_json(j);
}

inline Scenario parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace switchavg
