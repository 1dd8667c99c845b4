#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "switchavg/ctmc.hpp"

using namespace switchavg;

namespace {

struct Sample {
    double mean = 0.0;
    double se = 0.0;
};

Sample summarize(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

const Generator kSymmetric({{-1.0, 1.0}, {1.0, -1.0}});

} // namespace

TEST(Generator, RejectsNegativeOffDiagonal) {
    EXPECT_THROW(Generator({{1.0, -1.0}, {1.0, -1.0}}), InvalidGenerator);
}

TEST(Generator, RejectsNonConservativeRows) {
    EXPECT_THROW(Generator({{-1.0, 0.5}, {1.0, -1.0}}), InvalidGenerator);
    EXPECT_THROW(Generator({{-1.0, 1.0}, {1.0}}), InvalidGenerator);
}

TEST(Generator, RejectsReducibleChains) {
    // State 1 is absorbing.
    EXPECT_THROW(Generator({{-1.0, 1.0}, {0.0, 0.0}}), IrreducibilityError);
    EXPECT_THROW(Generator({{0.0, 0.0}, {0.0, 0.0}}), IrreducibilityError);
    // Two closed classes {0,1} and {2}.
    EXPECT_THROW(Generator({{-1.0, 1.0, 0.0}, {1.0, -1.0, 0.0}, {0.0, 0.0, 0.0}}), IrreducibilityError);
}

TEST(StationaryDistribution, SymmetricTwoState) {
    const auto nu = stationary_distribution(kSymmetric);
    EXPECT_NEAR(nu[0], 0.5, 1e-12);
    EXPECT_NEAR(nu[1], 0.5, 1e-12);
}

TEST(StationaryDistribution, AsymmetricTwoStateByHand) {
    // -2 nu1 + 3 nu2 = 0 and nu1 + nu2 = 1 give nu = (3/5, 2/5).
    const auto nu = stationary_distribution(Generator({{-2.0, 2.0}, {3.0, -3.0}}));
    EXPECT_NEAR(nu[0], 0.6, 1e-12);
    EXPECT_NEAR(nu[1], 0.4, 1e-12);
}

TEST(StationaryDistribution, ThreeStateCycle) {
    const auto nu = stationary_distribution(Generator({{-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}, {1.0, 0.0, -1.0}}));
    for (double v : nu.nu) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(StationaryDistribution, SatisfiesBalanceOnRandomGenerators) {
    Stream rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + trial % 5;
        std::vector<std::vector<double>> q(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                q[i][j] = 0.1 + 3.0 * rng.uniform();
                row += q[i][j];
            }
            q[i][i] = -row;
        }
        const Generator Q(q);
        const auto nu = stationary_distribution(Q);
        double total = 0.0;
        for (double v : nu.nu) {
            EXPECT_GT(v, 0.0);
            total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        for (std::size_t j = 0; j < m; ++j) {
            double bal = 0.0;
            for (std::size_t i = 0; i < m; ++i) bal += nu[i] * Q.rate(i, j);
            EXPECT_NEAR(bal, 0.0, 1e-10);
        }
    }
}

TEST(SamplePath, SingleStateNeverJumps) {
    const auto path = sample_path(Generator(std::vector<std::vector<double>>{{0.0}}), 0.01, 0, 0.0, 5.0, Stream(1));
    EXPECT_TRUE(path.jump_times.empty());
    ASSERT_EQ(path.states.size(), 1u);
    const auto occ = occupation_fractions(path);
    ASSERT_EQ(occ.size(), 1u);
    EXPECT_DOUBLE_EQ(occ[0], 1.0);
}

TEST(SamplePath, StructuralInvariants) {
    const auto path = sample_path(kSymmetric, 0.05, 1, 2.0, 12.0, Stream(5));
    ASSERT_EQ(path.states.size(), path.jump_times.size() + 1);
    EXPECT_EQ(path.states.front(), 1);
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
        EXPECT_GT(path.jump_times[k], 2.0);
        EXPECT_LE(path.jump_times[k], 12.0);
        if (k > 0) {
            EXPECT_GT(path.jump_times[k], path.jump_times[k - 1]);
        }
        EXPECT_NE(path.states[k], path.states[k + 1]);
    }
    // Piecewise constant and right-continuous.
    for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
        EXPECT_EQ(path.regime_at(path.jump_times[k]), path.states[k + 1]);
        EXPECT_EQ(path.regime_at(std::nextafter(path.jump_times[k], 0.0)), path.states[k]);
    }
}

TEST(SamplePath, DeterministicGivenStream) {
    const auto a = sample_path(kSymmetric, 0.01, 0, 0.0, 10.0, Stream(77));
    const auto b = sample_path(kSymmetric, 0.01, 0, 0.0, 10.0, Stream(77));
    EXPECT_EQ(a.jump_times, b.jump_times);
    EXPECT_EQ(a.states, b.states);
}

TEST(SamplePath, MeanJumpCountMatchesRate) {
    // Both states leave at rate 1/eps, so jumps form a Poisson process with
    // mean horizon/eps = 1e4.
    std::vector<double> counts;
    for (std::size_t k = 0; k < 200; ++k)
        counts.push_back(static_cast<double>(sample_path(kSymmetric, 0.01, 0, 0.0, 100.0, Stream(3, k)).jump_times.size()));
    const auto s = summarize(counts);
    EXPECT_LT(std::abs(s.mean - 1e4), 3.0 * s.se);
}

TEST(SamplePath, OccupationNearStationary) {
    std::vector<double> frac;
    for (std::size_t k = 0; k < 50; ++k) frac.push_back(occupation_fractions(sample_path(kSymmetric, 0.01, 0, 0.0, 1000.0, Stream(4, k)))[0]);
    const auto s = summarize(frac);
    EXPECT_LT(std::abs(s.mean - 0.5), 3.0 * s.se);
}

TEST(SamplePath, HalvingEpsDoublesJumpCount) {
    std::vector<double> slow, fast;
    for (std::size_t k = 0; k < 200; ++k) {
        slow.push_back(static_cast<double>(sample_path(kSymmetric, 0.02, 0, 0.0, 50.0, Stream(6, k)).jump_times.size()));
        fast.push_back(static_cast<double>(sample_path(kSymmetric, 0.01, 0, 0.0, 50.0, Stream(7, k)).jump_times.size()));
    }
    const auto a = summarize(fast), b = summarize(slow);
    EXPECT_LT(std::abs(a.mean - 2.0 * b.mean), 3.0 * std::sqrt(a.se * a.se + 4.0 * b.se * b.se));
}

TEST(SamplePath, EmbeddedChainFollowsRates) {
    // From state 0 the chain moves to 1 w.p. 1/3 and to 2 w.p. 2/3.
    const Generator Q({{-3.0, 1.0, 2.0}, {1.0, -1.0, 0.0}, {1.0, 0.0, -1.0}});
    int to1 = 0, total = 0;
    for (std::size_t k = 0; k < 4000; ++k) {
        const auto p = sample_path(Q, 1.0, 0, 0.0, 100.0, Stream(8, k));
        if (p.jump_times.empty()) continue;
        ++total;
        to1 += p.states[1] == 1 ? 1 : 0;
    }
    const double phat = static_cast<double>(to1) / total;
    EXPECT_NEAR(phat, 1.0 / 3.0, 3.0 * std::sqrt(2.0 / 9.0 / total));
}

TEST(SamplePath, OccupationDeviationShrinksWithHorizon) {
    // Median |occupation - 1/2| over 50 paths, for growing horizons.
    std::vector<double> medians;
    for (double T : {1e2, 1e3, 1e4}) {
        std::vector<double> dev;
        for (std::size_t k = 0; k < 50; ++k)
            dev.push_back(std::abs(occupation_fractions(sample_path(kSymmetric, 0.1, 0, 0.0, T, Stream(9, k)))[0] - 0.5));
        std::nth_element(dev.begin(), dev.begin() + 25, dev.end());
        medians.push_back(dev[25]);
    }
    EXPECT_GT(medians[0], medians[1]);
    EXPECT_GT(medians[1], medians[2]);
}

TEST(OccupationFractions, HandBuiltPath) {
    SwitchingPath p;
    p.m0 = 2;
    p.t0 = 0.0;
    p.t_end = 2.0;
    p.jump_times = {1.0};
    p.states = {0, 1};
    const auto occ = occupation_fractions(p);
    EXPECT_DOUBLE_EQ(occ[0], 0.5);
    EXPECT_DOUBLE_EQ(occ[1], 0.5);
}

TEST(OccupationFractions, EmptySpanThrows) {
    SwitchingPath p;
    p.t0 = p.t_end = 1.0;
    p.states = {0};
    EXPECT_THROW(occupation_fractions(p), InvalidSpan);
    EXPECT_THROW(sample_path(kSymmetric, 0.1, 0, 1.0, 1.0, Stream(1)), InvalidSpan);
}

TEST(OccupationFractions, SumToOne) {
    for (std::size_t k = 0; k < 20; ++k) {
        const auto occ = occupation_fractions(sample_path(Generator({{-1.0, 0.5, 0.5}, {2.0, -3.0, 1.0}, {1.0, 1.0, -2.0}}),
                                                         0.05, 0, 0.0, 37.0, Stream(10, k)));
        EXPECT_NEAR(occ[0] + occ[1] + occ[2], 1.0, 1e-12);
    }
}
