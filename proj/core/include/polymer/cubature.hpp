#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace polymer {

struct CubatureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    std::size_t max_evaluations = 50'000'000;
};

struct CubatureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Integrand = std::function<double(std::span<const double>)>;

// h-adaptive cubature on a box with the degree-7/5 embedded Genz-Malik rule
// (dimension >= 2). The region with the largest error estimate is bisected
// along the axis with the largest fourth difference. Regions are processed in
// a fixed order, so the result is reproducible bit for bit.
CubatureResult adaptive_cubature(const Integrand& f, std::span<const double> lower,
                                 std::span<const double> upper,
                                 const CubatureOptions& options = {});

// One-dimensional adaptive integral; tolerates integrable endpoint
// singularities (double-exponential substitution).
CubatureResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                            double rel_tol = 1e-10);

}  // namespace polymer
