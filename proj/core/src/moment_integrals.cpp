#include "moment_integrals.hpp"

#include <algorithm>
#include <cmath>

namespace polymer::detail {

namespace {

CubatureResult add(CubatureResult a, const CubatureResult& b) {
    a.value += b.value;
    a.error += b.error;
    a.evaluations += b.evaluations;
    a.converged = a.converged && b.converged;
    return a;
}

double pow_m32(double d) { return 1.0 / (d * std::sqrt(d)); }

}  // namespace

// The a = 0 integrand blows up on the edge x = z = 0. Writing s = x + z =
// L w^2 and x = c s cancels the singularity against the Jacobian. Below
// y = eps the edge ends in the corner y = eps, x = z = 0; there x and z are
// shifted by delta = eps - y and delta = D v^2 smooths the approach.
CubatureResult crossing_integral(double eps, double a, bool placement, const CubatureOptions& opt) {
    CubatureResult total{0.0, 0.0, 0, true};
    if (eps < 1.0) {
        const double lo[3] = {eps, 0.0, 0.0};
        const double hi[3] = {1.0, 1.0, 1.0};
        auto f = [&](std::span<const double> p) {
            const double y = p[0], w = p[1], c = p[2];
            const double L = 1.0 - y;
            const double s = L * w * w;
            const double x = c * s, z = (1.0 - c) * s;
            const double det = x * y + x * z + y * z + a * (x + 2.0 * y + z) + a * a;
            const double weight = placement ? (1.0 - y - s) : 1.0;
            return weight * pow_m32(det) * s * 2.0 * L * w;
        };
        total = add(total, adaptive_cubature(f, lo, hi, opt));
    }
    const double y0 = std::max(0.0, 2.0 * eps - 1.0);
    const double D = eps - y0;
    if (D > 0.0) {
        const double lo[3] = {0.0, 0.0, 0.0};
        const double hi[3] = {1.0, 1.0, 1.0};
        auto f = [&](std::span<const double> p) {
            const double v = p[0], w = p[1], c = p[2];
            const double delta = D * v * v;
            const double y = eps - delta;
            const double L = 1.0 - eps - delta;
            if (L <= 0.0) return 0.0;
            const double s = L * w * w;
            const double x = delta + c * s, z = delta + (1.0 - c) * s;
            // (x + y)(y + z) - y^2 with x + y = eps + c s, y + z = eps + (1 - c) s.
            const double det = 2.0 * eps * delta - delta * delta + eps * s + c * (1.0 - c) * s * s +
                               a * (x + 2.0 * y + z) + a * a;
            const double weight = placement ? (1.0 - x - y - z) : 1.0;
            return weight * pow_m32(det) * s * 2.0 * L * w * 2.0 * D * v;
        };
        total = add(total, adaptive_cubature(f, lo, hi, opt));
    }
    return total;
}

CubatureResult nested_integral(double eps, double a, const CubatureOptions& opt) {
    if (eps >= 1.0) return {0.0, 0.0, 0, true};
    const double lo[2] = {eps, 0.0};
    const double hi[2] = {1.0, 1.0};
    // The integrand does not depend on how s = x + z is split, which
    // contributes the factor s.
    auto f = [&](std::span<const double> p) {
        const double y = p[0], w = p[1];
        const double L = 1.0 - y;
        const double s = L * w * w;
        const double det = s * (y + a) + 2.0 * a * y + a * a;
        return (1.0 - y - s) * pow_m32(det) * s * 2.0 * L * w;
    };
    return adaptive_cubature(f, lo, hi, opt);
}

CubatureResult disjoint_integral(double eps, double a, const CubatureOptions& opt) {
    const double L = 1.0 - 2.0 * eps;
    if (L <= 0.0) return {0.0, 0.0, 0, true};
    const double lo[2] = {0.0, 0.0};
    const double hi[2] = {L, 1.0};
    auto f = [&](std::span<const double> p) {
        const double xp = p[0];
        const double zp = (L - xp) * p[1];
        const double x = eps + xp, z = eps + zp;
        const double rest = 1.0 - x - z;
        return 0.5 * rest * rest * pow_m32((x + a) * (z + a)) * (L - xp);
    };
    return adaptive_cubature(f, lo, hi, opt);
}

}  // namespace polymer::detail
