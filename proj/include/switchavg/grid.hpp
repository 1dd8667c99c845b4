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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "switchavg/errors.hpp"

namespace switchavg {

/// Rectangular box [lo, hi] split into n cells per axis. Cells are indexed
/// row-major with axis 0 most significant.
struct GridSpec {
    std::vector<double> lo;
    std::vector<double> hi;
    std::size_t n = 2;

    std::size_t dim() const noexcept { return lo.size(); }

    std::size_t cells() const {
        std::size_t c = 1;
        for (std::size_t a = 0; a < dim(); ++a) c *= n;
        return c;
    }

    double width(std::size_t axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(n); }

    double cell_diagonal() const {
        double s = 0.0;
        for (std::size_t a = 0; a < dim(); ++a) s += width(a) * width(a);
        return std::sqrt(s);
    }

    void validate() const {
        if (lo.empty() || lo.size() != hi.size()) throw InvalidSpan("grid corners must have equal, nonzero dimension");
        if (n < 2) throw InvalidSpan("grid needs at least 2 cells per axis");
        for (std::size_t a = 0; a < dim(); ++a)
            if (!(lo[a] < hi[a])) throw InvalidSpan("grid requires lo < hi on every axis");
    }

    /// Cell containing x, or nullopt outside the box. A point on a shared
    /// face goes to the lower-index cell.
    std::optional<std::size_t> locate(std::span<const double> x) const {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < dim(); ++a) {
            if (!(x[a] >= lo[a] && x[a] <= hi[a])) return std::nullopt;
            const double u = (x[a] - lo[a]) / width(a);
            std::size_t i = u <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(u)) - 1;
            if (i >= n) i = n - 1;
            flat = flat * n + i;
        }
        return flat;
    }

    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> idx(dim());
        for (std::size_t a = dim(); a-- > 0;) {
            idx[a] = flat % n;
            flat /= n;
        }
        return idx;
    }

    std::vector<double> center(std::size_t flat) const {
        const auto idx = unflatten(flat);
        std::vector<double> c(dim());
        for (std::size_t a = 0; a < dim(); ++a) c[a] = lo[a] + (static_cast<double>(idx[a]) + 0.5) * width(a);
        return c;
    }

    bool operator==(const GridSpec&) const = default;
};

/// Probability measure on a grid, optionally resolved by regime.
/// weights[cell * regimes + r]; `overflow` is the fraction of mass that fell
/// outside the box before normalization.
struct GridMeasure {
    GridSpec spec;
    std::size_t regimes = 1;
    std::vector<double> weights;
    double overflow = 0.0;

    GridMeasure() = default;
    GridMeasure(GridSpec s, std::size_t m) : spec(std::move(s)), regimes(m), weights(spec.cells() * m, 0.0) {}

    double weight(std::size_t cell, std::size_t regime) const { return weights[cell * regimes + regime]; }
    double& weight(std::size_t cell, std::size_t regime) { return weights[cell * regimes + regime]; }

    double cell_weight(std::size_t cell) const {
        double s = 0.0;
        for (std::size_t r = 0; r < regimes; ++r) s += weight(cell, r);
        return s;
    }

    std::vector<double> marginal() const {
        std::vector<double> m(spec.cells());
        for (std::size_t c = 0; c < m.size(); ++c) m[c] = cell_weight(c);
        return m;
    }

    std::vector<double> regime_marginal() const {
        std::vector<double> m(regimes, 0.0);
        for (std::size_t c = 0; c < spec.cells(); ++c)
            for (std::size_t r = 0; r < regimes; ++r) m[r] += weight(c, r);
        return m;
    }

    double total() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void normalize() {
        const double s = total();
        if (!(s > 0.0)) throw GridCoverageError("measure has no mass inside the grid");
        for (double& w : weights) w /= s;
    }
};

} // namespace switchavg
