#include "polymer/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "moment_integrals.hpp"
#include "polymer/cubature.hpp"
#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/stats.hpp"

namespace polymer {

namespace {

const double kTwoPiM32 = std::pow(2.0 * std::numbers::pi, -1.5);
const double kTwoPiM3 = std::pow(2.0 * std::numbers::pi, -3.0);

struct Kappa2Entry {
    double value;
    double error;
};

Kappa2Entry kappa2_entry(double eps, double rtol) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, Kappa2Entry> memo;
    {
        std::lock_guard lock(mutex);
        if (auto it = memo.find({eps, rtol}); it != memo.end()) return it->second;
    }
    CubatureOptions opt;
    opt.rel_tol = rtol;
    const auto r = detail::crossing_integral(eps, 0.0, false, opt);
    const Kappa2Entry entry{kTwoPiM3 * r.value, kTwoPiM3 * r.error};
    if (!r.converged) {
        throw QuadratureError("kappa2: tolerance not reached", entry.value, entry.error);
    }
    std::lock_guard lock(mutex);
    memo.emplace(std::pair{eps, rtol}, entry);
    return entry;
}

void check_eps_list(std::span<const double> eps, const char* who) {
    if (eps.empty()) throw InvalidArgument(std::string(who) + ": empty eps list");
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0 && eps[k] < 1)) {
            throw InvalidArgument(std::string(who) + ": eps values must lie in (0, 1)");
        }
        if (k > 0 && !(eps[k] < eps[k - 1])) {
            throw InvalidArgument(std::string(who) + ": eps sequence must be decreasing");
        }
    }
}

std::vector<double> halving_ladder(double a, int levels) {
    if (levels < 1) throw InvalidArgument("richardson_levels must be >= 1");
    std::vector<double> as{a};
    for (int k = 1; k < levels; ++k) as.push_back(0.5 * as.back());
    return as;
}

TimeGrid study_grid(const MonteCarloOptions& opt, double a_min, double eps_min) {
    return opt.n_steps > 0 ? TimeGrid(opt.n_steps) : TimeGrid::resolving(a_min, eps_min);
}

}  // namespace

const char* to_string(Kappa2Method m) {
    switch (m) {
        case Kappa2Method::closed_form: return "closed_form";
        case Kappa2Method::quadrature: return "quadrature";
        case Kappa2Method::derivative_integration: return "derivative_integration";
    }
    return "?";
}

double kappa1(double eps) {
    if (!(eps > 0 && eps <= 1)) throw InvalidArgument("kappa1: eps must lie in (0, 1]");
    return 2.0 * kTwoPiM32 * (1.0 / std::sqrt(eps) - 1.0);
}

double kappa2(double eps, double rtol) { return renorm_constants(eps, Kappa2Method::quadrature, rtol).kappa2; }

RenormConstants renorm_constants(double eps, Kappa2Method method, double rtol) {
    if (!(eps > 0 && eps < 1)) throw InvalidArgument("kappa2: eps must lie in (0, 1)");
    if (!(rtol > 1e-12 && rtol < 1e-2)) throw InvalidArgument("kappa2: rtol must lie in (1e-12, 1e-2)");
    if (method == Kappa2Method::derivative_integration) return kappa2_by_derivative_integration(eps, rtol);
    const auto e = kappa2_entry(eps, rtol);
    return RenormConstants{eps, kappa1(eps), e.value, Kappa2Method::quadrature, e.error};
}

double kappa2_derivative(double eps) {
    if (!(eps > 0 && eps <= 0.5)) throw InvalidArgument("kappa2_derivative: eps must lie in (0, 1/2]");
    const double e = eps;
    auto t1f = [e](double s) {
        const double q = std::sqrt(2.0 * e * s - s * s);
        return 2.0 / ((4.0 * s + e) * std::sqrt(e * s)) - 2.0 / (e * q) +
               12.0 * s / (e * (4.0 * s + e) * q);
    };
    auto t2f = [e](double s) { return 4.0 / ((4.0 * s + e) * std::sqrt(e * s)); };
    auto t3f = [e](double s) {
        return (2.0 / e) * (1.0 / std::sqrt(2.0 * e * s - s * s) -
                            1.0 / std::sqrt(e * (1.0 - e) + s * (e - s)));
    };
    const double t1 = integrate_1d(t1f, 0.0, e, 1e-12).value;
    const double t2 = integrate_1d(t2f, e, 1.0 - e, 1e-12).value;
    const double t3 = integrate_1d(t3f, 0.0, e, 1e-12).value;
    return -kTwoPiM3 * (t1 + t2 + t3);
}

RenormConstants kappa2_by_derivative_integration(double eps, double rtol) {
    if (!(eps > 0 && eps < 1)) throw InvalidArgument("kappa2: eps must lie in (0, 1)");
    constexpr double ref = 0.5;
    if (eps >= ref) {
        auto out = renorm_constants(eps, Kappa2Method::quadrature, rtol);
        out.method = Kappa2Method::derivative_integration;
        return out;
    }
    const auto anchor = kappa2_entry(ref, rtol);
    const auto integral = integrate_1d([](double s) { return kappa2_derivative(s); }, eps, ref, 1e-10);
    return RenormConstants{eps, kappa1(eps), anchor.value - integral.value,
                           Kappa2Method::derivative_integration, anchor.error + integral.error};
}

EnergyValue j_bar(const Path& path, const Regularization& reg, double lambda, double s, double t) {
    if (!(lambda >= 0)) throw InvalidArgument("j_bar: lambda must be >= 0");
    if (!(0.0 <= s && s < t && t <= 1.0)) throw InvalidArgument("j_bar: need 0 <= s < t <= 1");
    const TimeWindow window{s, t, s, t};
    const double J = local_time(path, reg, window).value;
    if (lambda == 0.0) return EnergyValue{0.0, 0.0, t - s};
    const double k1 = reg.eps < 1.0 ? kappa1(reg.eps) : 0.0;
    const double k2 = reg.eps < 1.0 ? kappa2(reg.eps) : 0.0;
    return EnergyValue{lambda * J - lambda * (t - s) * k1 + lambda * lambda * (t - s) * k2, lambda, t - s};
}

std::vector<K1Point> estimate_K1(std::span<const double> eps, const MonteCarloOptions& opt) {
    check_eps_list(eps, "estimate_K1");
    if (opt.replicas < 2) throw InvalidArgument("estimate_K1: need at least 2 replicas");
    const auto as = halving_ladder(opt.a, opt.richardson_levels);
    const TimeGrid grid = study_grid(opt, as.back(), eps.back());
    const std::size_t ne = eps.size();
    std::vector<std::vector<double>> vals(ne, std::vector<double>(opt.replicas));
    parallel_for(opt.replicas, [&](std::size_t m) {
        const Path path = sample_wiener(grid, opt.seed, m);
        const auto J = local_time_batch(path, eps, as);
        for (std::size_t ie = 0; ie < ne; ++ie) vals[ie][m] = richardson(J[ie], opt.richardson_rate);
    });
    std::vector<K1Point> out;
    for (std::size_t ie = 0; ie < ne; ++ie) {
        const auto ms = mean_se(vals[ie]);
        out.push_back(K1Point{eps[ie], ms.mean - kappa1(eps[ie]), ms.se,
                              2.0 * kTwoPiM32 * (std::sqrt(eps[ie]) - 1.0)});
    }
    return out;
}

VarSlope estimate_var_slope(std::span<const double> eps, const MonteCarloOptions& opt) {
    check_eps_list(eps, "estimate_var_slope");
    if (eps.size() < 3 || eps.front() / eps.back() < 4.0 * (1.0 - 1e-12)) {
        throw InvalidArgument("estimate_var_slope: need >= 3 eps values spanning a factor >= 4");
    }
    if (opt.replicas < 2) throw InvalidArgument("estimate_var_slope: need at least 2 replicas");
    const TimeGrid grid = study_grid(opt, opt.a, eps.back());
    const std::size_t ne = eps.size();
    const std::size_t M = opt.replicas;
    std::vector<std::vector<double>> vals(ne, std::vector<double>(M));
    const double a_list[1] = {opt.a};
    parallel_for(M, [&](std::size_t m) {
        const Path path = sample_wiener(grid, opt.seed, m);
        const auto J = local_time_batch(path, eps, a_list);
        for (std::size_t ie = 0; ie < ne; ++ie) vals[ie][m] = J[ie][0];
    });

    VarSlope out;
    std::vector<double> x(ne);
    std::vector<std::vector<double>> infl(ne, std::vector<double>(M));
    for (std::size_t ie = 0; ie < ne; ++ie) {
        const double mu = pairwise_sum(vals[ie]) / static_cast<double>(M);
        std::vector<double> sq(M);
        for (std::size_t m = 0; m < M; ++m) sq[m] = (vals[ie][m] - mu) * (vals[ie][m] - mu);
        const double var = pairwise_sum(sq) / static_cast<double>(M - 1);
        for (std::size_t m = 0; m < M; ++m) infl[ie][m] = sq[m] - var;
        out.eps.push_back(eps[ie]);
        out.variance.push_back(var);
        out.variance_se.push_back(mean_se(infl[ie]).se);
        x[ie] = std::log(eps[ie]);
    }
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(ne);
    double sxx = 0.0;
    for (double xi : x) sxx += (xi - xbar) * (xi - xbar);
    std::vector<double> cs(ne), ci(ne);
    for (std::size_t ie = 0; ie < ne; ++ie) {
        cs[ie] = (x[ie] - xbar) / sxx;
        ci[ie] = 1.0 / static_cast<double>(ne) - xbar * cs[ie];
    }
    std::vector<double> psi_s(M, 0.0), psi_i(M, 0.0);
    for (std::size_t ie = 0; ie < ne; ++ie) {
        out.slope += cs[ie] * out.variance[ie];
        out.intercept += ci[ie] * out.variance[ie];
        for (std::size_t m = 0; m < M; ++m) {
            psi_s[m] += cs[ie] * infl[ie][m];
            psi_i[m] += ci[ie] * infl[ie][m];
        }
    }
    out.slope_se = mean_se(psi_s).se;
    out.intercept_se = mean_se(psi_i).se;
    return out;
}

}  // namespace polymer
