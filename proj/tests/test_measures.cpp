#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "switchavg/measures.hpp"

using namespace switchavg;

namespace {

using Rows = std::vector<std::vector<double>>;

GridMeasure point_mass(const GridSpec& spec, std::span<const double> x) {
    GridMeasure mu(spec, 1);
    mu.weight(*spec.locate(x), 0) = 1.0;
    return mu;
}

HybridModel ou(double rate = 1.0) {
    HybridModel m;
    m.name = "ou";
    m.generator = Generator(Rows{{0.0}});
    m.drift = [rate](std::span<const double> x, int, std::span<double> out) { out[0] = -rate * x[0]; };
    m.diffusion = [](std::span<const double>, int, std::span<double> out) { out[0] = 1.0; };
    return m;
}

// Two regimes pushing the Hopf normal form in opposite directions; the
// averaged field is the Hopf field with the unit circle as its cycle.
HybridModel switched_hopf() {
    HybridModel m;
    m.name = "switched-hopf";
    m.dim = 2;
    m.brownian_dim = 2;
    m.generator = Generator(Rows{{-1.0, 1.0}, {1.0, -1.0}});
    m.drift = [](std::span<const double> x, int i, std::span<double> out) {
        const double r2 = x[0] * x[0] + x[1] * x[1], push = i == 0 ? 0.5 : -0.5;
        out[0] = x[0] - x[1] - x[0] * r2 + push;
        out[1] = x[0] + x[1] - x[1] * r2;
    };
    m.diffusion = [](std::span<const double>, int, std::span<double> out) {
        out[0] = 0.2;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = 0.2;
    };
    return m;
}

VectorField hopf() {
    VectorField v;
    v.dim = 2;
    v.eval = [](std::span<const double> x, std::span<double> out) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        out[0] = x[0] - x[1] - x[0] * r2;
        out[1] = x[0] + x[1] - x[1] * r2;
    };
    return v;
}

} // namespace

TEST(GridSpec, LocateUsesLowerCellOnSharedFaces) {
    const GridSpec g{{0.0}, {4.0}, 4};
    const std::vector<double> at1{1.0}, at0{0.0}, at4{4.0}, mid{2.5}, out{4.1}, neg{-0.1};
    EXPECT_EQ(*g.locate(at1), 0u);
    EXPECT_EQ(*g.locate(at0), 0u);
    EXPECT_EQ(*g.locate(at4), 3u);
    EXPECT_EQ(*g.locate(mid), 2u);
    EXPECT_FALSE(g.locate(out));
    EXPECT_FALSE(g.locate(neg));
}

TEST(GridSpec, RowMajorIndexing) {
    const GridSpec g{{0.0, 0.0}, {3.0, 3.0}, 3};
    const std::vector<double> x{2.5, 0.5};
    EXPECT_EQ(*g.locate(x), 6u);
    EXPECT_EQ(g.unflatten(6), (std::vector<std::size_t>{2, 0}));
    EXPECT_EQ(g.center(6), (std::vector<double>{2.5, 0.5}));
    EXPECT_NEAR(g.cell_diagonal(), std::sqrt(2.0), 1e-15);
    EXPECT_THROW((GridSpec{{0.0}, {0.0}, 3}.validate()), InvalidSpan);
    EXPECT_THROW((GridSpec{{0.0}, {1.0}, 1}.validate()), InvalidSpan);
}

TEST(BoundedLipschitz, PointMassesOnTheLine) {
    // For unit masses at a and b the distance is min(|a - b|, 2).
    const GridSpec g{{0.0}, {4.0}, 40};
    const std::vector<double> a{1.05}, b{2.05}, c{0.05}, e{3.95}, f{1.35};
    EXPECT_NEAR(bl_distance(point_mass(g, a), point_mass(g, b)), 1.0, 1e-12);
    EXPECT_NEAR(bl_distance(point_mass(g, c), point_mass(g, e)), 2.0, 1e-12);
    EXPECT_NEAR(bl_distance(point_mass(g, a), point_mass(g, f)), 0.3, 1e-12);
    EXPECT_EQ(bl_distance(point_mass(g, a), point_mass(g, a)), 0.0);
}

TEST(BoundedLipschitz, MetricPropertiesOnRandomMeasures) {
    const GridSpec g{{-1.0, 0.0}, {1.0, 3.0}, 12};
    Stream rng(5);
    auto random_measure = [&] {
        GridMeasure mu(g, 2);
        for (double& w : mu.weights) w = rng.uniform() < 0.3 ? rng.uniform() : 0.0;
        mu.weights[0] += 1e-3;
        mu.normalize();
        return mu;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_measure(), q = random_measure(), r = random_measure();
        const double pq = bl_distance(p, q), qp = bl_distance(q, p);
        EXPECT_EQ(pq, qp);
        EXPECT_LE(pq, 2.0);
        EXPECT_LE(pq, bl_distance(p, r) + bl_distance(r, q) + 1e-12);
    }
    // Point masses are never farther apart than their distance.
    for (int trial = 0; trial < 50; ++trial) {
        const auto c1 = g.center(static_cast<std::size_t>(rng.uniform() * 144));
        const auto c2 = g.center(static_cast<std::size_t>(rng.uniform() * 144));
        const double d = std::hypot(c1[0] - c2[0], c1[1] - c2[1]);
        EXPECT_LE(bl_distance(point_mass(g, c1), point_mass(g, c2)), std::min(d, 2.0) + 1e-12);
    }
}

TEST(BoundedLipschitz, FamilyIsFixedBySeed) {
    const GridSpec g{{0.0, 0.0}, {1.0, 1.0}, 10};
    const auto a = bl_family(g, 3), b = bl_family(g, 3), c = bl_family(g, 4);
    ASSERT_EQ(a.size(), 64u);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].direction, b[k].direction);
        EXPECT_EQ(a[k].offset, b[k].offset);
        EXPECT_NEAR(std::hypot(a[k].direction[0], a[k].direction[1]), 1.0, 1e-12);
    }
    // The 16 coordinate ramps are shared; the random members differ.
    EXPECT_EQ(a[15].offset, c[15].offset);
    EXPECT_NE(a[16].offset, c[16].offset);
}

TEST(BoundedLipschitz, RejectsDifferentGrids) {
    const GridSpec g{{0.0}, {1.0}, 10}, h{{0.0}, {1.0}, 11};
    EXPECT_THROW(bl_distance(GridMeasure(g, 1), GridMeasure(h, 1)), SpecMismatch);
}

TEST(NeighborhoodMass, IncludesHomeCellAndNearbyCenters) {
    const GridSpec g{{0.0, 0.0}, {4.0, 4.0}, 4};
    GridMeasure mu(g, 2);
    mu.weight(5, 0) = 0.25;  // center (1.5, 1.5)
    mu.weight(5, 1) = 0.25;
    mu.weight(6, 0) = 0.2;   // center (1.5, 2.5)
    mu.weight(15, 1) = 0.3;  // center (3.5, 3.5)
    const std::vector<double> p{1.9, 1.9};
    EXPECT_NEAR(neighborhood_mass(mu, p, 0.0), 0.5, 1e-15);
    EXPECT_NEAR(neighborhood_mass(mu, p, 0.75), 0.7, 1e-15);
    EXPECT_NEAR(neighborhood_mass(mu, p, 10.0), 1.0, 1e-15);
}

TEST(IntegrateTestFunction, UsesCellCentersAndRegimes) {
    const GridSpec g{{0.0}, {2.0}, 2};
    GridMeasure mu(g, 2);
    mu.weight(0, 0) = 0.5;
    mu.weight(1, 1) = 0.5;
    EXPECT_NEAR(integrate_test_function(mu, [](std::span<const double> x, int i) { return x[0] * (i + 1); }),
                0.5 * 0.5 + 0.5 * 1.5 * 2.0, 1e-15);
    EXPECT_NEAR(integrate_marginal(mu, [](std::span<const double> x) { return x[0]; }), 1.0, 1e-15);
    EXPECT_EQ(mu.regime_marginal(), (std::vector<double>{0.5, 0.5}));
}

TEST(EmpiricalMeasure, OrnsteinUhlenbeckSecondMoment) {
    // Stationary law N(0, delta/2); cell-center quadrature adds width^2/12.
    const GridSpec g{{-2.0}, {2.0}, 80};
    const std::vector<double> x0{0.0};
    const auto mu = empirical_measure(ou(), 1.0, 0.1, x0, 0, 5000.0, 1e-2, 10.0, g, Stream(1));
    EXPECT_NEAR(mu.total(), 1.0, 1e-12);
    EXPECT_EQ(mu.overflow, 0.0);
    const double m2 = integrate_marginal(mu, [](std::span<const double> x) { return x[0] * x[0]; });
    EXPECT_NEAR(m2, 0.05 + 0.05 * 0.05 / 12.0, 5e-3);
    EXPECT_NEAR(integrate_marginal(mu, [](std::span<const double> x) { return x[0]; }), 0.0, 1e-2);
}

TEST(EmpiricalMeasure, RegimeMarginalMatchesStationaryLaw) {
    HybridModel m = ou();
    m.generator = Generator(Rows{{-2.0, 2.0}, {3.0, -3.0}});
    const GridSpec g{{-3.0}, {3.0}, 30};
    const std::vector<double> x0{0.0};
    const auto mu = empirical_measure(m, 0.01, 0.1, x0, 0, 200.0, 1e-2, 1.0, g, Stream(2));
    const auto rm = mu.regime_marginal();
    EXPECT_NEAR(rm[0], 0.6, 0.01);
    EXPECT_NEAR(rm[1], 0.4, 0.01);
}

TEST(EmpiricalMeasure, ErrorPaths) {
    const std::vector<double> x0{0.0};
    EXPECT_THROW(empirical_measure(ou(), 1.0, 0.1, x0, 0, 50.0, 1e-2, 1.0, GridSpec{{1.0}, {2.0}, 10}, Stream(1)),
                 GridCoverageError);
    EXPECT_THROW(empirical_measure(ou(), 1.0, 0.1, x0, 0, 50.0, 1e-2, 50.0, GridSpec{{-2.0}, {2.0}, 10}, Stream(1)),
                 InvalidSpan);
    EXPECT_THROW(empirical_measure(ou(), 1.0, 0.1, x0, 0, 50.0, 1e-2, 1.0,
                                   GridSpec{{-2.0, -2.0}, {2.0, 2.0}, 10}, Stream(1)),
                 SpecMismatch);
}

TEST(ConvergenceSweep, SwitchedHopfApproachesCycleMeasure) {
    const std::vector<double> start{1.0, 0.0};
    const auto cyc = detect_limit_cycle(hopf(), start, 20.0);
    const ScaleSchedule sched{ScaleCase::case1, 1.0, {0.1, 0.001}};
    std::vector<NamedTestFn> tests{{"x2", [](std::span<const double> x, int) { return x[0] * x[0]; }}};
    SweepConfig cfg;
    cfg.x0 = start;
    cfg.T = 300.0;
    cfg.burn_in = 10.0;
    cfg.dt = 1e-3;
    cfg.seed = 4;
    cfg.threads = 2;
    const std::vector<std::vector<double>> cps{{0.0, 0.0}};
    const auto rep = convergence_sweep(switched_hopf(), sched, cyc, cps, tests, cfg);
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& row : rep.rows) ASSERT_TRUE(row.ok()) << row.error;
    EXPECT_EQ(rep.rows[1].delta, 0.001);
    EXPECT_NEAR(rep.radii[0], 0.1, 1e-6);
    EXPECT_LT(rep.rows[1].bl_distance, rep.rows[0].bl_distance);
    EXPECT_LT(rep.rows[1].bl_distance, 0.05);
    EXPECT_LT(rep.rows[1].gaps[0], 0.02);
    // The origin repels, so its neighbourhood carries almost no mass.
    EXPECT_LT(rep.rows[1].neighborhood_masses[0], 1e-3);
    EXPECT_NEAR(rep.rows[1].tightness, 1.0, 1e-12);

    cfg.threads = 1;
    const auto again = convergence_sweep(switched_hopf(), sched, cyc, cps, tests, cfg);
    EXPECT_EQ(again.rows[0].bl_distance, rep.rows[0].bl_distance);
    EXPECT_EQ(again.rows[1].gaps, rep.rows[1].gaps);
}

TEST(ConvergenceSweep, FailingRowIsRecordedAndSweepContinues) {
    const std::vector<double> start{1.0, 0.0};
    const auto cyc = detect_limit_cycle(hopf(), start, 20.0);
    // delta = 40 eps: the first row is too noisy for the default grid.
    const ScaleSchedule sched{ScaleCase::case1, 40.0, {0.5, 1e-4}};
    SweepConfig cfg;
    cfg.x0 = start;
    cfg.T = 60.0;
    cfg.burn_in = 5.0;
    const auto rep = convergence_sweep(switched_hopf(), sched, cyc, {}, {}, cfg);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_FALSE(rep.rows[0].ok());
    EXPECT_TRUE(rep.rows[1].ok()) << rep.rows[1].error;
}
