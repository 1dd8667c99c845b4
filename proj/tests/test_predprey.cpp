#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "switchavg/predprey.hpp"
#include "switchavg/sde.hpp"

using namespace switchavg;

namespace {

using Rows = std::vector<std::vector<double>>;

PredPreyParams constant_params() {
    PredPreyParams p;
    p.a = {1.0, 2.0};
    p.b = {0.5, 0.25};
    p.c = {0.3, 0.6};
    p.d = {0.1, 0.2};
    p.f = {0.7, 0.4};
    p.lambda = {0.5, 0.5};
    p.rho = {0.2, 0.3};
    p.response = FunctionalResponse::constant({0.8, 1.6});
    return p;
}

const Generator kQ(Rows{{-2.0, 2.0}, {3.0, -3.0}});

} // namespace

TEST(PredPrey, DriftAndDiffusionByHand) {
    const auto m = build_model(constant_params(), kQ);
    const std::vector<double> z{2.0, 3.0};
    std::vector<double> f(2), g(4);
    m.drift(z, 1, f);
    EXPECT_NEAR(f[0], 2.0 * (2.0 - 0.25 * 2.0 - 3.0 * 1.6), 1e-15);
    EXPECT_NEAR(f[1], 3.0 * (-0.6 - 0.2 * 3.0 + 0.4 * 2.0 * 1.6), 1e-15);
    m.diffusion(z, 0, g);
    EXPECT_DOUBLE_EQ(g[0], 1.0);
    EXPECT_EQ(g[1], 0.0);
    EXPECT_EQ(g[2], 0.0);
    EXPECT_DOUBLE_EQ(g[3], 0.6);
    EXPECT_EQ(m.positive, (std::vector<bool>{true, true}));
}

TEST(PredPrey, DegenerateBeddingtonDeAngelisIsConstant) {
    auto bd = constant_params();
    bd.response = FunctionalResponse::beddington_deangelis({0.8, 1.6}, {1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0});
    const auto a = build_model(constant_params(), kQ), b = build_model(bd, kQ);
    std::vector<double> fa(2), fb(2);
    for (double x : {0.1, 1.0, 4.0})
        for (double y : {0.2, 2.0})
            for (int i : {0, 1}) {
                const std::vector<double> z{x, y};
                a.drift(z, i, fa);
                b.drift(z, i, fb);
                EXPECT_EQ(fa, fb);
            }
}

TEST(PredPrey, AveragedFieldEqualsAveragedDrift) {
    // With constant response the averaged system is again of the same form,
    // so it must agree with the nu-weighted drift of the hybrid model.
    const auto p = constant_params();
    const auto nu = stationary_distribution(kQ);
    const auto m = build_model(p, kQ);
    const auto special = averaged_predprey(p, nu), generic = averaged_field(m, nu);
    for (double x : {0.3, 1.7})
        for (double y : {0.4, 2.2}) {
            const std::vector<double> z{x, y};
            const auto u = special(z), v = generic(z);
            EXPECT_NEAR(u[0], v[0], 1e-14);
            EXPECT_NEAR(u[1], v[1], 1e-14);
        }
}

TEST(PredPrey, HollingAveragedFieldMatchesDrift) {
    // Holling II with regime-independent denominator also averages exactly.
    auto p = constant_params();
    p.response = FunctionalResponse::holling2({1.2, 0.8}, {1.0, 1.0}, {1.0, 1.0});
    const auto nu = stationary_distribution(kQ);
    const auto special = averaged_predprey(p, nu), generic = averaged_field(build_model(p, kQ), nu);
    const std::vector<double> z{1.3, 0.9};
    EXPECT_NEAR(special(z)[0], generic(z)[0], 1e-14);
    EXPECT_NEAR(special(z)[1], generic(z)[1], 1e-14);
}

TEST(PredPrey, ValidationErrors) {
    auto p = constant_params();
    p.a[0] = -1.0;
    EXPECT_THROW(build_model(p, kQ), InvalidModel);
    p = constant_params();
    p.rho.pop_back();
    EXPECT_THROW(build_model(p, kQ), InvalidModel);
    p = constant_params();
    p.response = FunctionalResponse::beddington_deangelis({1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0});
    EXPECT_THROW(build_model(p, kQ), InvalidModel);
    p.response = FunctionalResponse::holling2({1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0});
    p.response.m4 = {0.5, 0.0};
    EXPECT_THROW(build_model(p, kQ), InvalidModel);
    EXPECT_THROW(build_model(constant_params(), Generator(Rows{{0.0}})), InvalidModel);
}

TEST(PredPrey, PathsStayPositive) {
    const auto ex = holling_example();
    const auto tr = simulate(ex.model, 0.01, 0.01, ex.x0, 0, 50.0, 1e-3, Stream(1), SimOptions{100});
    for (double v : tr.states) {
        EXPECT_GT(v, 0.0);
        EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(HollingExample, ComponentFieldByHand) {
    const auto ex = holling_example();
    // nu = (1/2, 1/2): a_bar = 1, h1 = 1/(1+x), c_bar = 1, d_bar = 0.02,
    // h2 = (1.5*1.2 + 2*0.8)/2 / (1+x) = 1.7/(1+x).
    const double b_bar = 0.5 * (0.9 / 4.737 + 1.1 / 5.238);
    EXPECT_NEAR(ex.component_conversion, 1.7, 1e-15);
    for (double x : {0.5, 2.0, 6.0})
        for (double y : {0.5, 3.0}) {
            const std::vector<double> z{x, y};
            const auto v = ex.component_field(z);
            EXPECT_NEAR(v[0], x * (1.0 - b_bar * x) - x * y / (1.0 + x), 1e-14);
            EXPECT_NEAR(v[1], y * (-1.0 + 1.7 * x / (1.0 + x) - 0.02 * y), 1e-14);
        }
    // The prey self-limitation averages to 0.2 up to rounding in the table.
    EXPECT_NEAR(b_bar, 0.2, 2e-6);
    EXPECT_GT(std::abs(b_bar - 0.2), 1e-6);
}

TEST(HollingExample, ReferenceFieldCriticalPoints) {
    const auto ex = holling_example();
    const auto res = find_critical_points(ex.reference_field, Box{{-0.5, -0.5}, {6.0, 6.0}});
    ASSERT_EQ(res.points.size(), 3u);
    EXPECT_NEAR(res.points[0].location[0], 0.0, 1e-9);
    EXPECT_NEAR(res.points[0].location[1], 0.0, 1e-9);
    EXPECT_EQ(res.points[0].stability, Stability::saddle);
    // Interior point: y = (1+x)(1-x/5) and 1.6x/(1+x) - 1 = 0.02 y.
    const auto& in = res.points[1].location;
    EXPECT_NEAR(in[1], (1.0 + in[0]) * (1.0 - in[0] / 5.0), 1e-9);
    EXPECT_NEAR(in[0], ex.reference_equilibrium[0], 1e-3);
    EXPECT_NEAR(in[1], ex.reference_equilibrium[1], 1e-3);
    EXPECT_EQ(res.points[1].stability, Stability::source);
    // (5, 0): eigenvalues -1 and -1 + 1.6*5/6.
    EXPECT_NEAR(res.points[2].location[0], 5.0, 1e-9);
    EXPECT_EQ(res.points[2].stability, Stability::saddle);
}

TEST(HollingExample, ComponentCycleSurroundsReferencePoint) {
    const auto ex = holling_example();
    const auto cyc = detect_limit_cycle(ex.component_field, ex.x0, 100.0);
    EXPECT_GT(cyc.period, 1.0);
    // Winding number of the cycle around the reference equilibrium is 1.
    double turn = 0.0;
    for (std::size_t j = 0; j + 1 < cyc.size(); ++j) {
        const double a0 = std::atan2(cyc.state(j)[1] - 1.795, cyc.state(j)[0] - 1.836);
        const double a1 = std::atan2(cyc.state(j + 1)[1] - 1.795, cyc.state(j + 1)[0] - 1.836);
        turn += std::remainder(a1 - a0, 2.0 * std::numbers::pi);
    }
    EXPECT_NEAR(std::abs(turn), 2.0 * std::numbers::pi, 1e-6);
}

TEST(MomentDiagnostics, HandTrajectory) {
    Trajectory tr;
    tr.dim = 2;
    const std::vector<double> a{1.0, 1.0}, b{2.0, 2.0}, c{3.0, 3.0};
    tr.push(0.0, a, 0);
    tr.push(1.0, b, 0);
    tr.push(2.0, c, 1);
    const auto all = moment_diagnostics(tr, 2.5);
    EXPECT_DOUBLE_EQ(all.mean_square_norm, 5.0);
    EXPECT_DOUBLE_EQ(all.sup_square_norm, 18.0);
    EXPECT_DOUBLE_EQ(all.box_fraction, 1.0);
    const auto late = moment_diagnostics(tr, 1.5, {0.5, 2.0});
    // Weights 0.5 on |a|^2 = 2 and 1 on |b|^2 = 8.
    EXPECT_DOUBLE_EQ(late.mean_square_norm, (0.5 * 2.0 + 8.0) / 1.5);
    EXPECT_DOUBLE_EQ(late.box_fraction, 0.5 / 1.5);
    EXPECT_DOUBLE_EQ(late.sup_square_norm, 18.0);
}

TEST(MomentDiagnostics, Errors) {
    Trajectory tr;
    tr.dim = 2;
    const std::vector<double> a{1.0, 1.0}, bad{0.0, 1.0};
    tr.push(0.0, a, 0);
    EXPECT_THROW(moment_diagnostics(tr, 1.0), InvalidTrajectory);
    tr.push(1.0, bad, 0);
    EXPECT_THROW(moment_diagnostics(tr, 2.0), InvalidTrajectory);
    Trajectory one;
    one.dim = 1;
    EXPECT_THROW(moment_diagnostics(one, 2.0), InvalidTrajectory);
}
