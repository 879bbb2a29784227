#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polymer/error.hpp"
#include "polymer/localtime.hpp"
#include "polymer/oracle.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

namespace {

constexpr double pi = std::numbers::pi;

// int_eps^1 (1 - r) (2 pi (a + r))^-3/2 dr in closed form.
double mean_closed_form(double eps, double a) {
    auto F = [a](double s) { return -2 * (1 + a) / std::sqrt(s) - 2 * std::sqrt(s); };
    return std::pow(2 * pi, -1.5) * (F(1 + a) - F(eps + a));
}

}  // namespace

TEST(ExactMean, ClosedForm) {
    for (double eps : {0.5, 0.1, 0.01}) {
        for (double a : {0.0, 0.01, 0.2}) {
            const double ref = mean_closed_form(eps, a);
            EXPECT_NEAR(exact_mean_J(eps, a), ref, 1e-10 * ref) << eps << " " << a;
        }
    }
    EXPECT_EQ(exact_mean_J(1.0, 0.1), 0.0);
    EXPECT_EQ(exact_mean_J(2.0, 0.1), 0.0);
    EXPECT_THROW(exact_mean_J(0.0, 0.1), InvalidArgument);
}

TEST(ExactMean, DiscreteConvergesToContinuum) {
    const auto reg = Regularization::fixed(0.1, 0.05);
    const double ref = exact_mean_J(0.1, 0.05);
    const double e1 = std::abs(exact_mean_J_discrete(TimeGrid(64), reg) - ref);
    const double e2 = std::abs(exact_mean_J_discrete(TimeGrid(512), reg) - ref);
    EXPECT_LT(e2, 1e-3 * ref);
    EXPECT_LT(e2, e1 / 20);
}

TEST(ExactMean, MatchesMonteCarlo) {
    const TimeGrid g(64);
    const auto reg = Regularization::fixed(0.2, 0.1);
    const int M = 4000;
    std::vector<double> v(M);
    for (int m = 0; m < M; ++m) v[m] = local_time(sample_wiener(g, 31, m), reg).value;
    const auto ms = mean_se(v);
    EXPECT_NEAR(ms.mean, exact_mean_J_discrete(g, reg), 4 * ms.se);
}

TEST(PairDensity, DisjointFactorizes) {
    const double a = 0.1;
    const double d = gaussian_pair_density({0.0, 0.3}, {0.5, 0.9}, a);
    EXPECT_NEAR(d, std::pow(2 * pi, -3) * std::pow((0.3 + a) * (0.4 + a), -1.5), 1e-12);
}

TEST(PairDensity, OverlapAndSymmetry) {
    const double a = 0.05;
    const double d = gaussian_pair_density({0.1, 0.6}, {0.4, 0.9}, a);
    const double det = (0.5 + a) * (0.5 + a) - 0.2 * 0.2;
    EXPECT_NEAR(d, std::pow(2 * pi, -3) * std::pow(det, -1.5), 1e-12);
    EXPECT_DOUBLE_EQ(d, gaussian_pair_density({0.4, 0.9}, {0.1, 0.6}, a));
}

TEST(PairDensity, Errors) {
    EXPECT_THROW(gaussian_pair_density({0.2, 0.5}, {0.2, 0.5}, 0.0), InvalidArgument);
    EXPECT_THROW(gaussian_pair_density({0.5, 0.2}, {0.0, 0.1}, 0.1), InvalidArgument);
}

TEST(SecondMoment, MatchesMonteCarlo) {
    const double eps = 0.2, a = 0.1;
    const auto m2 = exact_second_moment_J(eps, a);
    EXPECT_NEAR(m2.value, 0.0051528537, 1e-8);
    const TimeGrid g(256);
    const auto reg = Regularization::fixed(eps, a);
    const int M = 4000;
    std::vector<double> v(M);
    for (int m = 0; m < M; ++m) {
        const double J = local_time(sample_wiener(g, 32, m), reg).value;
        v[m] = J * J;
    }
    const auto ms = mean_se(v);
    EXPECT_NEAR(ms.mean, m2.value, 4 * ms.se);
}

TEST(SecondMoment, JensenAndVariance) {
    for (double eps : {0.5, 0.1, 0.02}) {
        const double mean = exact_mean_J(eps, 0.01);
        const auto m2 = exact_second_moment_J(eps, 0.01);
        EXPECT_GT(m2.value, mean * mean);
        EXPECT_NEAR(exact_variance_J(eps, 0.01).value, m2.value - mean * mean, 1e-12);
    }
}

TEST(SecondMoment, ToleranceConvergence) {
    const auto loose = exact_second_moment_J(0.1, 0.02, 1e-4);
    const auto tight = exact_second_moment_J(0.1, 0.02, 1e-9);
    EXPECT_NEAR(loose.value, tight.value, 1e-4 * tight.value);
    EXPECT_LE(tight.error, 1e-9 * tight.value);
}

TEST(SecondMoment, Validation) {
    EXPECT_THROW(exact_second_moment_J(0.0, 0.1), InvalidArgument);
    EXPECT_THROW(exact_second_moment_J(0.1, -0.1), InvalidArgument);
    EXPECT_THROW(exact_second_moment_J(0.1, 0.1, 0.0), InvalidArgument);
}
