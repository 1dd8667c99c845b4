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

// The averaged system: nu-weighted drift, fixed-step RK4, equilibria,
// limit-cycle detection on a Poincare section, and the occupation measure
// of the cycle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "switchavg/ctmc.hpp"
#include "switchavg/errors.hpp"
#include "switchavg/grid.hpp"
#include "switchavg/model.hpp"

namespace switchavg {

using FieldFn = std::function<void(std::span<const double> x, std::span<double> out)>;
using JacobianFn = std::function<void(std::span<const double> x, std::span<double> out)>;

struct VectorField {
    std::size_t dim = 1;
    FieldFn eval;
    JacobianFn jacobian;  // optional, row-major dim x dim

    std::vector<double> operator()(std::span<const double> x) const {
        std::vector<double> out(dim);
        eval(x, out);
        return out;
    }
};

namespace detail {

inline double norm(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Reusable RK4 stepper.
class Rk4 {
public:
    explicit Rk4(const VectorField& f) : f_(&f), k1_(f.dim), k2_(f.dim), k3_(f.dim), k4_(f.dim), tmp_(f.dim) {}

    /// Advances x by h in place; returns |f(x)| at the start of the step.
    double step(std::vector<double>& x, double h) {
        const std::size_t d = x.size();
        f_->eval(x, k1_);
        for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
        f_->eval(tmp_, k2_);
        for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
        f_->eval(tmp_, k3_);
        for (std::size_t i = 0; i < d; ++i) tmp_[i] = x[i] + h * k3_[i];
        f_->eval(tmp_, k4_);
        for (std::size_t i = 0; i < d; ++i) x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        return norm(k1_);
    }

private:
    const VectorField* f_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

inline bool all_finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

} // namespace detail

/// f_bar(x) = sum_i f(x, i) nu_i.
inline VectorField averaged_field(const HybridModel& model, const StationaryDist& nu) {
    if (nu.size() != model.regimes()) throw InvalidModel("stationary distribution size does not match regimes");
    VectorField out;
    out.dim = model.dim;
    out.eval = [drift = model.drift, weights = nu.nu, d = model.dim](std::span<const double> x, std::span<double> y) {
        std::vector<double> fi(d);
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            drift(x, static_cast<int>(i), fi);
            for (std::size_t c = 0; c < d; ++c) y[c] += weights[i] * fi[c];
        }
    };
    return out;
}

inline Trajectory integrate_ode(const VectorField& field, std::span<const double> x0, double T, double dt) {
    const TimeGrid grid(T, dt);
    Trajectory traj;
    traj.dim = field.dim;
    traj.meta.dt = dt;
    std::vector<double> x(x0.begin(), x0.end());
    detail::Rk4 rk(field);
    traj.push(0.0, x, 0);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const double t0 = grid.time(k), t1 = grid.time(k + 1);
        rk.step(x, t1 - t0);
        if (!detail::all_finite(x)) throw BlowupError(t1);
        traj.push(t1, x, 0);
    }
    return traj;
}

/// Central-difference Jacobian with step 1e-5 * max(1, |x_k|), row-major.
inline std::vector<double> jacobian(const VectorField& field, std::span<const double> x) {
    const std::size_t d = field.dim;
    std::vector<double> J(d * d);
    if (field.jacobian) {
        field.jacobian(x, J);
        return J;
    }
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end()), fp(d), fm(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        field.eval(xp, fp);
        field.eval(xm, fm);
        for (std::size_t i = 0; i < d; ++i) J[i * d + k] = (fp[i] - fm[i]) / (2.0 * h);
        xp[k] = xm[k] = x[k];
    }
    return J;
}

enum class Stability { sink, source, saddle, nonhyperbolic };

inline std::string to_string(Stability s) {
    switch (s) {
    case Stability::sink: return "sink";
    case Stability::source: return "source";
    case Stability::saddle: return "saddle";
    case Stability::nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

struct CriticalPoint {
    std::vector<double> location;
    double residual = 0.0;
    std::vector<std::complex<double>> eigenvalues;
    Stability stability = Stability::nonhyperbolic;
};

inline CriticalPoint classify(const VectorField& field, std::vector<double> x) {
    CriticalPoint cp;
    cp.residual = detail::norm(field(x));
    const std::size_t d = field.dim;
    const auto J = jacobian(field, x);
    Eigen::MatrixXd M(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = J[i * d + k];
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    std::size_t neg = 0, pos = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> ev = es.eigenvalues()(i);
        cp.eigenvalues.push_back(ev);
        if (ev.real() < -1e-9) ++neg;
        else if (ev.real() > 1e-9) ++pos;
    }
    if (neg == d) cp.stability = Stability::sink;
    else if (pos == d) cp.stability = Stability::source;
    else if (neg + pos == d) cp.stability = Stability::saddle;
    cp.location = std::move(x);
    return cp;
}

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct CriticalPointSearch {
    std::vector<CriticalPoint> points;
    /// Sign-change cells in which Newton failed from every seed.
    std::vector<std::string> warnings;
};

namespace detail {

// Damped Newton with finite-difference Jacobian. Returns true when |f| < tol.
inline bool newton(const VectorField& field, std::vector<double>& x, double tol, int max_iter = 60) {
    const std::size_t d = field.dim;
    std::vector<double> f = field(x), trial(d);
    double r = norm(f);
    for (int it = 0; it < max_iter && r >= tol; ++it) {
        if (!std::isfinite(r)) return false;
        const auto J = jacobian(field, x);
        Eigen::MatrixXd M(d, d);
        Eigen::VectorXd b(d);
        for (std::size_t i = 0; i < d; ++i) {
            b(static_cast<Eigen::Index>(i)) = -f[i];
            for (std::size_t k = 0; k < d; ++k)
                M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = J[i * d + k];
        }
        const Eigen::VectorXd step = M.fullPivLu().solve(b);
        if (!step.allFinite()) return false;
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] + lambda * step(static_cast<Eigen::Index>(i));
            const auto ft = field(trial);
            const double rt = norm(ft);
            if (std::isfinite(rt) && rt < r) {
                x = trial;
                f = ft;
                r = rt;
                improved = true;
                break;
            }
        }
        if (!improved) return false;
    }
    return r < tol;
}

} // namespace detail

/// Newton from the cells of a coarse grid in which every component of the
/// field changes sign (or vanishes) across the cell corners. Roots within
/// 10*tol are merged.
inline CriticalPointSearch find_critical_points(const VectorField& field, const Box& box, std::size_t coarse_n = 40,
                                                double tol = 1e-10) {
    const std::size_t d = field.dim;
    if (box.lo.size() != d || box.hi.size() != d) throw InvalidSpan("box dimension does not match the field");
    if (coarse_n < 8) throw InvalidSpan("coarse grid needs at least 8 cells per axis");
    GridSpec coarse{box.lo, box.hi, coarse_n};
    coarse.validate();

    // Field values at the (coarse_n+1)^d nodes.
    const std::size_t nodes_per_axis = coarse_n + 1;
    std::size_t node_count = 1;
    for (std::size_t a = 0; a < d; ++a) node_count *= nodes_per_axis;
    std::vector<double> node_vals(node_count * d);
    std::vector<double> x(d), fx(d);
    for (std::size_t nidx = 0; nidx < node_count; ++nidx) {
        std::size_t rem = nidx;
        for (std::size_t a = d; a-- > 0;) {
            x[a] = box.lo[a] + static_cast<double>(rem % nodes_per_axis) * coarse.width(a);
            rem /= nodes_per_axis;
        }
        field.eval(x, fx);
        std::copy(fx.begin(), fx.end(), node_vals.begin() + static_cast<std::ptrdiff_t>(nidx * d));
    }

    CriticalPointSearch out;
    auto inside = [&](std::span<const double> p) {
        for (std::size_t a = 0; a < d; ++a) {
            const double slack = 1e-9 * (box.hi[a] - box.lo[a]);
            if (p[a] < box.lo[a] - slack || p[a] > box.hi[a] + slack) return false;
        }
        return true;
    };
    auto record = [&](std::vector<double> p) {
        for (const auto& cp : out.points)
            if (detail::distance(cp.location, p) < 10.0 * tol) return;
        out.points.push_back(classify(field, std::move(p)));
    };

    const std::size_t corners = std::size_t{1} << d;
    for (std::size_t cell = 0; cell < coarse.cells(); ++cell) {
        const auto idx = coarse.unflatten(cell);
        std::vector<double> fmin(d, std::numeric_limits<double>::infinity());
        std::vector<double> fmax(d, -std::numeric_limits<double>::infinity());
        bool finite = true;
        for (std::size_t c = 0; c < corners; ++c) {
            std::size_t nidx = 0;
            for (std::size_t a = 0; a < d; ++a) nidx = nidx * nodes_per_axis + idx[a] + ((c >> a) & 1u);
            for (std::size_t i = 0; i < d; ++i) {
                const double v = node_vals[nidx * d + i];
                finite = finite && std::isfinite(v);
                fmin[i] = std::min(fmin[i], v);
                fmax[i] = std::max(fmax[i], v);
            }
        }
        if (!finite) continue;
        bool candidate = true;
        for (std::size_t i = 0; i < d; ++i) candidate = candidate && fmin[i] <= 0.0 && fmax[i] >= 0.0;
        if (!candidate) continue;

        // Seeds: the cell center, then its corners.
        std::vector<std::vector<double>> seeds{coarse.center(cell)};
        for (std::size_t c = 0; c < corners; ++c) {
            std::vector<double> s(d);
            for (std::size_t a = 0; a < d; ++a)
                s[a] = box.lo[a] + static_cast<double>(idx[a] + ((c >> a) & 1u)) * coarse.width(a);
            seeds.push_back(std::move(s));
        }
        bool found = false;
        for (auto& s : seeds) {
            if (detail::newton(field, s, tol) && inside(s)) {
                record(std::move(s));
                found = true;
                break;
            }
        }
        if (!found) {
            const auto c = coarse.center(cell);
            std::string msg = "newton did not converge in cell centered at (";
            for (std::size_t a = 0; a < d; ++a) msg += (a ? "," : "") + std::to_string(c[a]);
            out.warnings.push_back(msg + ")");
        }
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) { return a.location < b.location; });
    return out;
}

/// Hyperplane {x : normal . (x - point) = 0}.
struct Section {
    std::vector<double> point;
    std::vector<double> normal;
};

/// One period of a closed orbit, sampled uniformly in time: samples
/// 0..N where sample N closes the orbit back onto sample 0.
struct LimitCycle {
    std::size_t dim = 2;
    std::vector<double> times;
    std::vector<double> states;
    double period = 0.0;
    Section section;
    double closure_error = 0.0;

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
};

struct CycleOptions {
    double dt = 1e-3;
    double closure_tol = 1e-6;
    double max_time = 1e4;
    std::size_t samples = 2000;
    /// Speeds below this are treated as having reached an equilibrium.
    double equilibrium_speed = 1e-8;
};

/// Integrates past the transient, erects a section through the current
/// point orthogonal to the flow, and iterates the return map until two
/// consecutive returns are within closure_tol. Crossings are refined by
/// bisection on the sub-step length to 1e-10 in time.
inline LimitCycle detect_limit_cycle(const VectorField& field, std::span<const double> x0, double transient = 100.0,
                                     const CycleOptions& opts = {}) {
    const std::size_t d = field.dim;
    std::vector<double> x(x0.begin(), x0.end());
    detail::Rk4 rk(field);

    auto check_speed = [&](double speed, double t) {
        if (speed < opts.equilibrium_speed)
            throw ConvergesToEquilibrium("trajectory reached an equilibrium near t=" + std::to_string(t));
    };

    for (double t = 0.0; t < transient;) {
        const double h = std::min(opts.dt, transient - t);
        check_speed(rk.step(x, h), t);
        if (!detail::all_finite(x)) throw BlowupError(t + h);
        t += h;
    }

    auto f0 = field(x);
    const double speed0 = detail::norm(f0);
    check_speed(speed0, transient);
    Section section{x, f0};
    for (double& v : section.normal) v /= speed0;
    auto signed_dist = [&](std::span<const double> p) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += section.normal[i] * (p[i] - section.point[i]);
        return s;
    };

    std::vector<double> last_return = x, trial(d);
    double last_return_time = 0.0, lap_extent = 0.0;
    std::size_t returns = 0;
    double t = 0.0, s = 0.0;
    double period = 0.0;
    bool converged = false;
    while (!converged) {
        if (t > opts.max_time) throw NoCycleError("no closed return within max_time");
        const std::vector<double> x_prev = x;
        check_speed(rk.step(x, opts.dt), transient + t);
        if (!detail::all_finite(x)) throw BlowupError(transient + t + opts.dt);
        const double s_new = signed_dist(x);
        lap_extent = std::max(lap_extent, detail::distance(x, last_return));

        if (s < 0.0 && s_new >= 0.0) {
            // Bisection on the sub-step length tau with s(tau) changing sign.
            double a = 0.0, b = opts.dt;
            while (b - a > 1e-10) {
                const double mid = 0.5 * (a + b);
                trial = x_prev;
                rk.step(trial, mid);
                (signed_dist(trial) < 0.0 ? a : b) = mid;
            }
            trial = x_prev;
            rk.step(trial, b);
            const double t_cross = t + b;
            // Only crossings near the previous return count; far crossings of
            // the hyperplane belong to other parts of the orbit.
            if (detail::distance(trial, last_return) <= 0.5 * lap_extent) {
                if (lap_extent < 10.0 * opts.closure_tol)
                    throw ConvergesToEquilibrium("returns collapsed onto a point");
                const double gap = detail::distance(trial, last_return);
                ++returns;
                if (returns >= 2 && gap < opts.closure_tol) {
                    period = t_cross - last_return_time;
                    converged = true;
                }
                last_return = trial;
                last_return_time = t_cross;
                lap_extent = 0.0;
            }
        }
        s = s_new;
        t += opts.dt;
    }

    // Resample one period uniformly in time starting on the section.
    LimitCycle cyc;
    cyc.dim = d;
    cyc.period = period;
    cyc.section = {last_return, section.normal};
    const std::size_t N = std::max<std::size_t>(opts.samples, 8);
    const double spacing = period / static_cast<double>(N);
    const auto sub = static_cast<std::size_t>(std::ceil(spacing / opts.dt));
    const double h = spacing / static_cast<double>(sub);
    x = last_return;
    for (std::size_t j = 0; j <= N; ++j) {
        cyc.times.push_back(static_cast<double>(j) * spacing);
        cyc.states.insert(cyc.states.end(), x.begin(), x.end());
        if (j == N) break;
        for (std::size_t q = 0; q < sub; ++q) check_speed(rk.step(x, h), static_cast<double>(j) * spacing);
    }
    cyc.closure_error = detail::distance(cyc.state(0), cyc.state(N));
    double diameter = 0.0;
    for (std::size_t j = 0; j < N; ++j) diameter = std::max(diameter, detail::distance(cyc.state(j), cyc.state(0)));
    if (diameter < 1e3 * opts.closure_tol) throw ConvergesToEquilibrium("closed orbit has collapsed onto a point");
    return cyc;
}

/// Default neighbourhood radius for exit-time experiments at a critical
/// point: 10% of its distance to the cycle.
inline double exit_radius(const LimitCycle& cycle, std::span<const double> center) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cycle.size(); ++j) best = std::min(best, detail::distance(cycle.state(j), center));
    return 0.1 * best;
}

/// Occupation measure of one period: each of the N uniform-in-time
/// samples carries mass 1/N.
inline GridMeasure cycle_measure(const LimitCycle& cycle, const GridSpec& grid) {
    grid.validate();
    if (grid.dim() != cycle.dim) throw SpecMismatch("grid dimension does not match the cycle");
    GridMeasure mu(grid, 1);
    const std::size_t N = cycle.size() - 1;
    for (std::size_t j = 0; j < N; ++j) {
        const auto cell = grid.locate(cycle.state(j));
        if (!cell) throw GridCoverageError("limit cycle leaves the grid");
        mu.weight(*cell, 0) += 1.0 / static_cast<double>(N);
    }
    return mu;
}

/// (1/T) * integral of g over one period, trapezoid rule on the samples.
inline double cycle_average(const LimitCycle& cycle, const std::function<double(std::span<const double>)>& g) {
    const std::size_t N = cycle.size() - 1;
    double acc = 0.0;
    double prev = g(cycle.state(0));
    for (std::size_t j = 1; j <= N; ++j) {
        const double cur = g(cycle.state(j));
        acc += 0.5 * (prev + cur);
        prev = cur;
    }
    return acc / static_cast<double>(N);
}

/// Box of `scale` times the cycle's bounding box (same center) split into n cells per axis.
inline GridSpec default_grid(const LimitCycle& cycle, double scale = 1.5, std::size_t n = 200) {
    GridSpec g;
    g.n = n;
    g.lo.assign(cycle.dim, std::numeric_limits<double>::infinity());
    g.hi.assign(cycle.dim, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < cycle.size(); ++j)
        for (std::size_t a = 0; a < cycle.dim; ++a) {
            g.lo[a] = std::min(g.lo[a], cycle.state(j)[a]);
            g.hi[a] = std::max(g.hi[a], cycle.state(j)[a]);
        }
    for (std::size_t a = 0; a < cycle.dim; ++a) {
        const double mid = 0.5 * (g.lo[a] + g.hi[a]), half = 0.5 * (g.hi[a] - g.lo[a]) * scale;
        g.lo[a] = mid - half;
        g.hi[a] = mid + half;
    }
    return g;
}

} // namespace switchavg
