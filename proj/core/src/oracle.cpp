#include "polymer/oracle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "moment_integrals.hpp"
#include "polymer/error.hpp"
#include "polymer/parallel.hpp"

namespace polymer {

namespace {

const double kTwoPiM32 = std::pow(2.0 * std::numbers::pi, -1.5);
const double kTwoPiM3 = std::pow(2.0 * std::numbers::pi, -3.0);

}  // namespace

double exact_mean_J(double eps, double a) {
    if (!(eps > 0)) throw InvalidArgument("exact_mean_J: eps must be > 0");
    if (!(a >= 0)) throw InvalidArgument("exact_mean_J: a must be >= 0");
    if (eps >= 1.0) return 0.0;
    return 2.0 * kTwoPiM32 *
           ((1.0 - eps) / std::sqrt(a + eps) - 2.0 * (std::sqrt(1.0 + a) - std::sqrt(a + eps)));
}

double exact_mean_J_discrete(const TimeGrid& grid, const Regularization& reg,
                             const TimeWindow& window) {
    reg.validate();
    const auto quad = PairQuadrature::get(grid, reg.eps, window);
    const auto rows = quad->rows();
    const auto w = quad->weights();
    std::vector<double> sums(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rows[r].count; ++k) {
            const double lag = grid.time(rows[r].j_begin + k) - grid.time(rows[r].i);
            acc += w[rows[r].offset + k] * heat_kernel_at_zero(reg.a + std::abs(lag));
        }
        sums[r] = acc;
    }
    return pairwise_sum(sums);
}

double gaussian_pair_density(const Interval& i1, const Interval& i2, double a) {
    if (!(i1.lo <= i1.hi) || !(i2.lo <= i2.hi)) {
        throw InvalidArgument("gaussian_pair_density: intervals must satisfy lo <= hi");
    }
    const double l1 = i1.hi - i1.lo;
    const double l2 = i2.hi - i2.lo;
    const double o = std::max(0.0, std::min(i1.hi, i2.hi) - std::max(i1.lo, i2.lo));
    const double det = (l1 + a) * (l2 + a) - o * o;
    if (!(det > 0)) {
        throw InvalidArgument("gaussian_pair_density: singular covariance (det=" +
                              std::to_string(det) + ")");
    }
    return kTwoPiM3 / (det * std::sqrt(det));
}

MomentValue exact_second_moment_J(double eps, double a, double rtol) {
    if (!(eps > 0)) throw InvalidArgument("exact_second_moment_J: eps must be > 0");
    if (!(a >= 0)) throw InvalidArgument("exact_second_moment_J: a must be >= 0");
    if (!(rtol > 0 && rtol < 1)) throw InvalidArgument("exact_second_moment_J: rtol in (0,1)");
    if (eps >= 1.0) return {};
    CubatureOptions opt;
    opt.rel_tol = rtol;
    const auto b = detail::crossing_integral(eps, a, true, opt);
    const auto c = detail::nested_integral(eps, a, opt);
    const auto d = detail::disjoint_integral(eps, a, opt);
    MomentValue out;
    out.value = 2.0 * kTwoPiM3 * (b.value + c.value + d.value);
    out.error = 2.0 * kTwoPiM3 * (b.error + c.error + d.error);
    if (!(b.converged && c.converged && d.converged)) {
        throw QuadratureError("exact_second_moment_J: tolerance not reached", out.value, out.error);
    }
    return out;
}

MomentValue exact_variance_J(double eps, double a, double rtol) {
    const auto m2 = exact_second_moment_J(eps, a, rtol);
    const double m1 = exact_mean_J(eps, a);
    return {m2.value - m1 * m1, m2.error};
}

}  // namespace polymer
