#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polymer/localtime.hpp"
#include "polymer/paths.hpp"

namespace polymer {

enum class Kappa2Method { closed_form, quadrature, derivative_integration };
const char* to_string(Kappa2Method m);

struct RenormConstants {
    double eps = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    Kappa2Method method = Kappa2Method::quadrature;
    double kappa2_error = 0.0;  // achieved absolute error estimate
};

// Integral of p_t(0) over [eps, 1] = 2 (2 pi)^-3/2 (eps^-1/2 - 1); eps in (0, 1].
double kappa1(double eps);

// kappa2 by adaptive cubature of its defining triple integral. Values are
// memoized per (eps, rtol). Throws QuadratureError if rtol is not reached.
double kappa2(double eps, double rtol = 1e-7);
RenormConstants renorm_constants(double eps, Kappa2Method method = Kappa2Method::quadrature,
                                 double rtol = 1e-7);

// d kappa2 / d eps from its one-dimensional reduction; eps in (0, 1/2].
double kappa2_derivative(double eps);
// kappa2(1/2) by cubature minus the integral of the derivative down to eps.
RenormConstants kappa2_by_derivative_integration(double eps, double rtol = 1e-7);

struct EnergyValue {
    double jbar = 0.0;
    double lambda = 0.0;
    double interval_length = 0.0;
};

// lambda J(s,t;s,t) - lambda (t-s) kappa1 + lambda^2 (t-s) kappa2, with J
// taken at reg.a.
EnergyValue j_bar(const Path& path, const Regularization& reg, double lambda, double s = 0.0,
                  double t = 1.0);

struct MonteCarloOptions {
    std::size_t replicas = 10000;
    std::uint64_t seed = 1;
    double a = 0.02;
    // 0: smallest grid meeting the resolution rule at the finest kernel width.
    std::size_t n_steps = 0;
    // Number of kernel widths a, a/2, ... used for the a -> 0 extrapolation.
    int richardson_levels = 2;
    double richardson_rate = 1.0;
};

struct K1Point {
    double eps = 0.0;
    double estimate = 0.0;  // extrapolated E[J^eps] - kappa1(eps)
    double se = 0.0;
    double analytic = 0.0;  // 2 (2 pi)^-3/2 (sqrt(eps) - 1)
};

// One ensemble shared by all eps values (common random numbers).
std::vector<K1Point> estimate_K1(std::span<const double> eps, const MonteCarloOptions& opt);

struct VarSlope {
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
    double intercept_se = 0.0;
    std::vector<double> eps;
    std::vector<double> variance;
    std::vector<double> variance_se;
};

// Least-squares slope of Var(J^{eps,a}) against ln eps, at opt.a (no
// extrapolation). Standard errors account for the shared ensemble.
VarSlope estimate_var_slope(std::span<const double> eps, const MonteCarloOptions& opt);

}  // namespace polymer
