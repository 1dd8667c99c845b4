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

// Plot-ready file formats. Numbers are written with 17 significant digits
// so files round-trip doubles exactly.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchavg/averaging.hpp"
#include "switchavg/errors.hpp"
#include "switchavg/experiments.hpp"
#include "switchavg/grid.hpp"
#include "switchavg/measures.hpp"
#include "switchavg/model.hpp"

namespace switchavg::io {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `t,x1,...,xd,regime`, one row per sample.
inline void write_trajectory(std::ostream& os, const Trajectory& tr) {
    os << 't';
    for (std::size_t c = 0; c < tr.dim; ++c) os << ",x" << c + 1;
    os << ",regime\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << num(tr.times[k]);
        for (std::size_t c = 0; c < tr.dim; ++c) os << ',' << num(tr.at(k, c));
        os << ',' << tr.regimes[k] << '\n';
    }
}

/// Header `t,x1,...,xd` over one period.
inline void write_cycle(std::ostream& os, const LimitCycle& cyc) {
    os << 't';
    for (std::size_t c = 0; c < cyc.dim; ++c) os << ",x" << c + 1;
    os << '\n';
    for (std::size_t k = 0; k < cyc.size(); ++k) {
        os << num(cyc.times[k]);
        for (std::size_t c = 0; c < cyc.dim; ++c) os << ',' << num(cyc.state(k)[c]);
        os << '\n';
    }
}

/// Line 1: JSON header {"format","dim","lo","hi","n","regimes","overflow"}.
/// Then CSV `cell_1,...,cell_d,regime,weight` listing nonzero weights.
inline void write_measure(std::ostream& os, const GridMeasure& mu) {
    nlohmann::ordered_json header;
    header["format"] = "switchavg-grid-measure/1";
    header["dim"] = mu.spec.dim();
    header["lo"] = mu.spec.lo;
    header["hi"] = mu.spec.hi;
    header["n"] = mu.spec.n;
    header["regimes"] = mu.regimes;
    header["overflow"] = mu.overflow;
    os << header.dump() << '\n';
    for (std::size_t a = 0; a < mu.spec.dim(); ++a) os << "cell_" << a + 1 << ',';
    os << "regime,weight\n";
    for (std::size_t c = 0; c < mu.spec.cells(); ++c) {
        const auto idx = mu.spec.unflatten(c);
        for (std::size_t r = 0; r < mu.regimes; ++r) {
            const double w = mu.weight(c, r);
            if (w == 0.0) continue;
            for (std::size_t i : idx) os << i << ',';
            os << r << ',' << num(w) << '\n';
        }
    }
}

inline GridMeasure read_measure(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw SpecMismatch("measure file is empty");
    const auto header = nlohmann::json::parse(line);
    GridSpec spec;
    spec.lo = header.at("lo").get<std::vector<double>>();
    spec.hi = header.at("hi").get<std::vector<double>>();
    spec.n = header.at("n").get<std::size_t>();
    spec.validate();
    GridMeasure mu(spec, header.at("regimes").get<std::size_t>());
    mu.overflow = header.at("overflow").get<double>();
    std::getline(is, line);  // column names
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::size_t flat = 0;
        for (std::size_t a = 0; a < spec.dim(); ++a) {
            std::getline(ss, field, ',');
            flat = flat * spec.n + std::stoul(field);
        }
        std::getline(ss, field, ',');
        const std::size_t r = std::stoul(field);
        std::getline(ss, field, ',');
        mu.weight(flat, r) = std::stod(field);
    }
    return mu;
}

inline void write_exit_times(std::ostream& os, const ExitTimeStats& st) {
    os << "replicate,exit_time,censored\n";
    for (std::size_t k = 0; k < st.samples.size(); ++k)
        os << k << ',' << num(st.samples[k].time) << ',' << (st.samples[k].censored ? 1 : 0) << '\n';
}

/// One row per (eps, delta).
inline void write_convergence(std::ostream& os, const ConvergenceReport& rep) {
    os << "eps,delta,bl_distance";
    for (const auto& name : rep.test_functions) os << ",gap_" << name;
    for (std::size_t j = 0; j < rep.critical_points.size(); ++j) os << ",mass_cp" << j + 1;
    os << ",tightness,overflow,error\n";
    for (const auto& row : rep.rows) {
        os << num(row.eps) << ',' << num(row.delta) << ',' << (row.ok() ? num(row.bl_distance) : "");
        for (std::size_t j = 0; j < rep.test_functions.size(); ++j)
            os << ',' << (row.ok() ? num(row.gaps[j]) : "");
        for (std::size_t j = 0; j < rep.critical_points.size(); ++j)
            os << ',' << (row.ok() ? num(row.neighborhood_masses[j]) : "");
        std::string err = row.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        os << ',' << (row.ok() ? num(row.tightness) : "") << ',' << (row.ok() ? num(row.overflow) : "") << ','
           << err << '\n';
    }
}

template <class Writer, class Value>
void write_file(const std::string& path, Writer&& writer, const Value& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    writer(out, value);
    if (!out) throw Error("failed writing " + path);
}

} // namespace switchavg::io
