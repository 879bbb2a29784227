#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswers) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, {0, 0}),
              (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                {0xffffffff, 0xffffffff}),
              (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                {0xa4093822, 0x299f31d0}),
              (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, ReproducibleAndDistinct) {
    RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
        EXPECT_NE(x, d.next_u64());
    }
}

TEST(RngStream, UniformOpenInterval) {
    RngStream r(1, 2);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RngStream, NormalMoments) {
    RngStream r(7, 3);
    const int n = 200000;
    std::vector<double> x(n), x2(n), x4(n);
    for (int i = 0; i < n; ++i) {
        x[i] = r.normal();
        x2[i] = x[i] * x[i];
        x4[i] = x2[i] * x2[i];
    }
    const auto m1 = mean_se(x), m2 = mean_se(x2), m4 = mean_se(x4);
    EXPECT_NEAR(m1.mean, 0.0, 4 * m1.se);
    EXPECT_NEAR(m2.mean, 1.0, 4 * m2.se);
    EXPECT_NEAR(m4.mean, 3.0, 4 * m4.se);
}

TEST(RngStream, MixSeedSpreads) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(mix_seed(5, t));
    EXPECT_EQ(seen.size(), 1000u);
}
