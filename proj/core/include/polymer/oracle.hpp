#pragma once

#include "polymer/localtime.hpp"
#include "polymer/paths.hpp"

namespace polymer {

// E[J^{eps,a}] over the full window under Wiener measure:
// the integral over tau - sigma >= eps of p_{a + tau - sigma}(0).
double exact_mean_J(double eps, double a);

// Expectation of the discretized local time on `grid`: the pair weights
// applied to E[p_a(w_tau - w_sigma)] = p_{a + |tau - sigma|}(0).
double exact_mean_J_discrete(const TimeGrid& grid, const Regularization& reg,
                             const TimeWindow& window = TimeWindow::full());

struct Interval {
    double lo;
    double hi;
};

// (2 pi)^-3 det(C)^-3/2 with C = [[l1 + a, o], [o, l2 + a]], l the interval
// lengths and o their overlap.
double gaussian_pair_density(const Interval& i1, const Interval& i2, double a);

struct MomentValue {
    double value = 0.0;
    double error = 0.0;  // quadrature error estimate
};

// E[(J^{eps,a})^2], summed over the three orderings of the two time pairs.
// Throws QuadratureError when rtol is not reached within budget.
MomentValue exact_second_moment_J(double eps, double a, double rtol = 1e-7);
MomentValue exact_variance_J(double eps, double a, double rtol = 1e-7);

}  // namespace polymer
