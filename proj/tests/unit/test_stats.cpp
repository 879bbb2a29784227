#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "polymer/parallel.hpp"
#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST(Stats, MeanSe) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto m = mean_se(v);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-14);
}

TEST(Stats, LinearFitExact) {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = linear_fit(x, y);
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(Stats, WeightedFitUsesSigmas) {
    const std::vector<double> x{0, 1, 2}, y{0, 1, 2}, s{0.1, 0.1, 0.1};
    const auto f = linear_fit(x, y, s);
    EXPECT_NEAR(f.slope, 1.0, 1e-14);
    EXPECT_NEAR(f.slope_se, 0.1 / std::sqrt(2.0), 1e-12);
}

TEST(Stats, CanonicalSumPermutationInvariant) {
    RngStream r(3, 0);
    std::vector<double> v(1000);
    for (auto& x : v) x = r.normal() * std::exp(10 * r.uniform());
    const double s0 = canonical_sum(v);
    std::mt19937 g(1);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(v.begin(), v.end(), g);
        EXPECT_EQ(canonical_sum(v), s0);
    }
}

TEST(Stats, ParallelForCoversEachIndexOnce) {
    set_worker_count(4);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    set_worker_count(0);
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Stats, KsSameDistributionDoesNotReject) {
    RngStream r(9, 0);
    std::vector<double> a(5000), b(5000);
    for (auto& x : a) x = r.normal();
    for (auto& x : b) x = r.normal();
    EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
    for (auto& x : b) x += 0.2;
    EXPECT_LT(ks_two_sample(a, b).p_value, 1e-6);
}

TEST(Stats, BatchMeansInflatesForCorrelatedSeries) {
    RngStream r(2, 0);
    std::vector<double> ar(100000);
    double x = 0;
    for (auto& v : ar) v = x = 0.95 * x + r.normal();
    // Long-run sd of an AR(1) mean: sigma/(1-phi) with sigma the innovation sd.
    const double expected = 1.0 / 0.05 / std::sqrt(100000.0);
    EXPECT_NEAR(batch_means(ar).se, expected, 0.35 * expected);
    EXPECT_LT(mean_se(ar).se, 0.5 * expected);
}

TEST(Stats, LogSumExp) {
    const std::vector<double> v{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
}
