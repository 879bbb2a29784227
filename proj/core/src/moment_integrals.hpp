#pragma once

#include "polymer/cubature.hpp"

namespace polymer::detail {

// Integrals over the ordered gaps (x, y, z) between four time points in
// [0, 1] of det^(-3/2), where det is the determinant of the per-coordinate
// covariance of two increments (plus a on the diagonal). With `placement`
// the integrand carries the factor 1 - x - y - z from sliding the points
// inside [0, 1]. The (2 pi)^-3 prefactor is not included.

// Intervals [p1, p3] and [p2, p4] (overlap y); needs x + y >= eps, y + z >= eps.
CubatureResult crossing_integral(double eps, double a, bool placement, const CubatureOptions& opt);
// Intervals [p1, p4] and [p2, p3]; needs y >= eps.
CubatureResult nested_integral(double eps, double a, const CubatureOptions& opt);
// Intervals [p1, p2] and [p3, p4]; needs x >= eps, z >= eps.
CubatureResult disjoint_integral(double eps, double a, const CubatureOptions& opt);

}  // namespace polymer::detail
