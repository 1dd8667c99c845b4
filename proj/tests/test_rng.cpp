#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "switchavg/rng.hpp"

using switchavg::Stream;

TEST(Stream, CopiesReplayTheSameDraws) {
    Stream a(42, 3, 7);
    Stream b = a;
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Stream, KeysDependOnEveryComponent) {
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {1u, 2u})
        for (std::uint64_t rep : {0u, 1u})
            for (std::uint64_t purpose : {0u, 5u}) keys.insert(Stream(seed, rep, purpose).key());
    EXPECT_EQ(keys.size(), 8u);
}

TEST(Stream, SplitDoesNotAdvanceParent) {
    Stream a(9);
    Stream ref = a;
    Stream child = a.split(1);
    EXPECT_NE(child.key(), a.key());
    EXPECT_NE(a.split(1).key(), a.split(2).key());
    EXPECT_EQ(a.next_u64(), ref.next_u64());
}

TEST(Stream, UniformStaysInOpenInterval) {
    Stream s(1);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi, 1.0);
    // Mean 1/2, standard error sqrt(1/12/n).
    EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Stream, NormalMoments) {
    Stream s(2);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
    }
    m1 /= n;
    m2 /= n;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(n));
    // Var(Z^2) = 2.
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Stream, ExponentialMean) {
    Stream s(3);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.exponential(4.0);
    EXPECT_NEAR(sum / n, 0.25, 4.0 * 0.25 / std::sqrt(n));
}
