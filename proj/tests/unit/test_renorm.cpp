#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "polymer/error.hpp"
#include "polymer/localtime.hpp"
#include "polymer/renorm.hpp"

using namespace polymer;

namespace {

constexpr double pi = std::numbers::pi;

// kappa2 by nested Gauss-Legendre over (s1, x = s2 - s1, y = s3 - s2). The
// integrand is singular where s1 = y = 0, so (s1, y) is integrated in polar
// coordinates around the nearest admissible corner with r = R q^2.
double kappa2_oracle(double eps) {
    using G = boost::math::quadrature::gauss<double, 100>;
    auto inner = [&](double x) {
        const double d = std::max(0.0, eps - x);
        const double L = 1 - x - 2 * d;
        if (L <= 0) return 0.0;
        return G::integrate(
            [&](double th) {
                const double c = std::cos(th), s = std::sin(th);
                const double R = L / (c + s);
                return G::integrate(
                    [&](double q) {
                        const double r = R * q * q;
                        const double s1 = d + r * c, y = d + r * s;
                        return std::pow(s1 * x + s1 * y + x * y, -1.5) * r * 2 * R * q;
                    },
                    0.0, 1.0);
            },
            0.0, pi / 2);
    };
    const double near = G::integrate([&](double t) { return inner(eps - t * t) * 2 * t; }, 0.0, std::sqrt(eps));
    const double far = G::integrate(inner, eps, 1.0);
    return (near + far) / std::pow(2 * pi, 3);
}

}  // namespace

TEST(Kappa1, ClosedForm) {
    EXPECT_NEAR(kappa1(0.01), 18 * std::pow(2 * pi, -1.5), 1e-14);
    EXPECT_NEAR(kappa1(0.25), 2 * std::pow(2 * pi, -1.5), 1e-14);
    EXPECT_EQ(kappa1(1.0), 0.0);
    EXPECT_THROW(kappa1(0.0), InvalidArgument);
    EXPECT_THROW(kappa1(1.5), InvalidArgument);
}

TEST(Kappa2, MatchesIndependentQuadrature) {
    for (double eps : {0.5, 0.25, 0.1}) {
        const double ref = kappa2_oracle(eps);
        EXPECT_NEAR(kappa2(eps), ref, 1e-6 * ref) << eps;
    }
}

TEST(Kappa2, MonotoneDecreasing) {
    double prev = 0;
    for (double eps : {0.9, 0.5, 0.2, 0.1, 0.05, 0.02}) {
        const double k = kappa2(eps);
        EXPECT_GT(k, prev);
        prev = k;
    }
}

TEST(Kappa2, LogDivergenceSettles) {
    // kappa2 + (2 pi)^-2 log eps approaches a constant.
    auto f = [](double e) { return kappa2(e) + std::log(e) / (4 * pi * pi); };
    const double d1 = std::abs(f(0.02) - f(0.04));
    const double d2 = std::abs(f(0.01) - f(0.02));
    const double d3 = std::abs(f(0.005) - f(0.01));
    EXPECT_LT(d2, 0.8 * d1);
    EXPECT_LT(d3, 0.8 * d2);
    EXPECT_LT(d3, 2e-3);
}

TEST(Kappa2, DerivativeIntegrationAgrees) {
    for (double eps : {0.3, 0.05, 0.01}) {
        const auto r = kappa2_by_derivative_integration(eps);
        EXPECT_EQ(r.method, Kappa2Method::derivative_integration);
        EXPECT_NEAR(r.kappa2, kappa2(eps), 1e-7 * r.kappa2) << eps;
    }
}

TEST(Kappa2, DerivativeMatchesDifferences) {
    for (double eps : {0.4, 0.1, 0.02}) {
        const double h = 1e-4 * eps;
        const double fd = (kappa2(eps + h, 1e-10) - kappa2(eps - h, 1e-10)) / (2 * h);
        EXPECT_NEAR(kappa2_derivative(eps), fd, 1e-4 * std::abs(fd)) << eps;
    }
    EXPECT_THROW(kappa2_derivative(0.6), InvalidArgument);
}

TEST(Kappa2, Validation) {
    EXPECT_THROW(kappa2(0.0), InvalidArgument);
    EXPECT_THROW(kappa2(1.0), InvalidArgument);
    EXPECT_THROW(kappa2(0.1, 0.5), InvalidArgument);
    EXPECT_THROW(renorm_constants(0.1, Kappa2Method::quadrature, 1e-13), InvalidArgument);
}

TEST(RenormConstants, Fields) {
    const auto r = renorm_constants(0.1);
    EXPECT_EQ(r.eps, 0.1);
    EXPECT_DOUBLE_EQ(r.kappa1, kappa1(0.1));
    EXPECT_DOUBLE_EQ(r.kappa2, kappa2(0.1));
    EXPECT_GT(r.kappa2_error, 0.0);
    EXPECT_LT(r.kappa2_error, 1e-7 * r.kappa2 * 10);
    EXPECT_STREQ(to_string(r.method), "quadrature");
}

TEST(JBar, Identities) {
    const auto p = sample_wiener(TimeGrid(128), 3, 0);
    const auto reg = Regularization::fixed(0.1, 0.05);
    EXPECT_EQ(j_bar(p, reg, 0.0).jbar, 0.0);
    const double J = local_time(p, reg).value;
    const double lam = 0.7;
    EXPECT_NEAR(j_bar(p, reg, lam).jbar, lam * J - lam * kappa1(0.1) + lam * lam * kappa2(0.1), 1e-12);
    const double Jh = local_time(p, reg, {0.5, 1.0, 0.5, 1.0}).value;
    EXPECT_NEAR(j_bar(p, reg, lam, 0.5, 1.0).jbar,
                lam * Jh - 0.5 * lam * kappa1(0.1) + 0.5 * lam * lam * kappa2(0.1), 1e-12);
    EXPECT_THROW(j_bar(p, reg, -1.0), InvalidArgument);
    EXPECT_THROW(j_bar(p, reg, 1.0, 0.5, 0.5), InvalidArgument);
}

TEST(EstimateK1, ModerateEps) {
    MonteCarloOptions opt;
    opt.replicas = 3000;
    opt.seed = 21;
    opt.a = 0.05;
    opt.richardson_levels = 3;
    const double eps[2] = {0.5, 0.25};
    const auto pts = estimate_K1(eps, opt);
    ASSERT_EQ(pts.size(), 2u);
    for (const auto& p : pts) {
        EXPECT_NEAR(p.analytic, 2 * std::pow(2 * pi, -1.5) * (std::sqrt(p.eps) - 1), 1e-14);
        EXPECT_GT(p.se, 0.0);
        EXPECT_NEAR(p.estimate, p.analytic, 4 * p.se + 0.02 * std::abs(p.analytic)) << p.eps;
    }
}

TEST(EstimateK1, Validation) {
    MonteCarloOptions opt;
    opt.replicas = 10;
    const double inc[2] = {0.1, 0.2};
    EXPECT_THROW(estimate_K1(inc, opt), InvalidArgument);
    const double bad[1] = {1.0};
    EXPECT_THROW(estimate_K1(bad, opt), InvalidArgument);
    opt.richardson_levels = 0;
    const double ok[1] = {0.2};
    EXPECT_THROW(estimate_K1(ok, opt), InvalidArgument);
}

TEST(EstimateVarSlope, Validation) {
    MonteCarloOptions opt;
    opt.replicas = 10;
    const double two[2] = {0.2, 0.05};
    EXPECT_THROW(estimate_var_slope(two, opt), InvalidArgument);
    const double narrow[3] = {0.2, 0.15, 0.1};
    EXPECT_THROW(estimate_var_slope(narrow, opt), InvalidArgument);
}

TEST(EstimateVarSlope, SmallRun) {
    MonteCarloOptions opt;
    opt.replicas = 400;
    opt.seed = 22;
    opt.a = 0.05;
    const double eps[3] = {0.4, 0.2, 0.1};
    const auto r = estimate_var_slope(eps, opt);
    ASSERT_EQ(r.variance.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GT(r.variance[i], 0.0);
        EXPECT_GT(r.variance_se[i], 0.0);
    }
    EXPECT_LT(r.slope, 0.0);
    EXPECT_GT(r.slope_se, 0.0);
}
