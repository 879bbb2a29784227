#include "polymer/girsanov.hpp"

#include <cmath>
#include <string>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/stats.hpp"

namespace polymer {

namespace {

void require_k0(const Direction& h, const char* who) {
    if (h.cls != DirectionClass::K0) throw InvalidArgument(std::string(who) + ": h must be in K0");
}

}  // namespace

double cameron_martin_V(const Path& path, double u, const Direction& h) {
    require_k0(h, "cameron_martin_V");
    if (!(path.grid() == h.grid)) throw InvalidArgument("cameron_martin_V: grid mismatch");
    if (u == 0.0) return 0.0;
    const std::size_t n = path.grid().n_steps();
    const double dt = path.grid().dt();
    double wh2 = 0.0, h1sq = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double c = (i == 0 || i == n) ? 0.5 : 1.0;
        wh2 += c * dot(path[i], h.h2[i]);
        h1sq += c * norm2(h.h1[i]);
    }
    return u * dot(h.h1[n], path.end()) - u * wh2 * dt - 0.5 * u * u * h1sq * dt;
}

double pullback_difference(const Path& path, double u, const Direction& h,
                           const std::function<double(const Path&)>& f) {
    const double shifted = f(shift(path, -u, h));
    return shifted - f(path);
}

DensityEstimate a_uh_estimate(const Path& path, double u, const Direction& h, double lambda,
                              const Regularization& reg) {
    require_k0(h, "a_uh_estimate");
    if (!(lambda >= 0)) throw InvalidArgument("a_uh_estimate: lambda must be >= 0");
    DensityEstimate d;
    d.level = reg.level;
    if (u == 0.0) return d;
    d.v_part = cameron_martin_V(path, u, h);
    if (lambda != 0.0) {
        d.rho_part = pullback_difference(path, u, h,
                                         [&](const Path& p) { return local_time(p, reg).value; });
    }
    d.log_value = -lambda * d.rho_part + d.v_part;
    d.value = std::exp(d.log_value);
    return d;
}

DensityEstimate a_uh_estimate(const Path& path, double u, const Direction& h, double lambda,
                              int level, double eps0) {
    return a_uh_estimate(path, u, h, lambda, Regularization::at_level(level, eps0));
}

QuasiInvarianceReport quasi_invariance_check(const Observable& f, double u, const Direction& h,
                                             double lambda, const Regularization& reg,
                                             std::size_t replicas, std::uint64_t seed) {
    require_k0(h, "quasi_invariance_check");
    const TimeGrid& grid = h.grid;
    const auto ens = importance_sample(grid, reg, lambda, replicas, seed);
    std::vector<double> lhs(replicas), rhs(replicas), diff(replicas);
    parallel_for(replicas, [&](std::size_t i) {
        const Path path = ens.path(i);
        lhs[i] = f(shift(path, u, h));
        rhs[i] = f(path) * a_uh_estimate(path, u, h, lambda, reg).value;
        diff[i] = lhs[i] - rhs[i];
    });
    QuasiInvarianceReport rep;
    const auto l = ens.mean(lhs);
    const auto r = ens.mean(rhs);
    const auto d = ens.mean(diff);
    rep.lhs = l.mean;
    rep.rhs = r.mean;
    rep.lhs_se = l.se;
    rep.rhs_se = r.se;
    rep.combined_se = d.se;
    rep.pass = std::abs(rep.lhs - rep.rhs) <= 3.0 * rep.combined_se;
    return rep;
}

DnValue D_n_lambda(const Path& path, double u, const Direction& h, int level, double lambda,
                   double delta1, double eps0) {
    require_k0(h, "D_n_lambda");
    DnValue out;
    int call = 0;
    out.energy_difference = pullback_difference(path, u, h, [&](const Path& p) {
        const auto te = truncated_energy(p, level, lambda, delta1, eps0);
        (call++ == 0 ? out.indicator_shifted : out.indicator_base) = te.indicator;
        return te.value;
    });
    out.v_part = cameron_martin_V(path, u, h);
    out.value = std::exp(-out.energy_difference + out.v_part);
    return out;
}

TimeGrid level_grid(int level, double eps0, std::size_t min_steps) {
    const auto reg = Regularization::at_level(level, eps0);
    return TimeGrid::resolving(0.5 * reg.a, reg.eps, min_steps);
}

DecayReport moment_decay_report(double u1, double u2, const Direction& h, double lambda, int p,
                                int n_lo, int n_hi, double eps0, std::size_t replicas,
                                std::uint64_t seed) {
    if (p != 2 && p != 4) throw InvalidArgument("moment_decay_report: p must be 2 or 4");
    if (n_hi <= n_lo || n_lo < 0) throw InvalidArgument("moment_decay_report: need 0 <= n_lo < n_hi");
    if (replicas < 2) throw InvalidArgument("moment_decay_report: need at least 2 replicas");
    if (!(lambda >= 0)) throw InvalidArgument("moment_decay_report: lambda must be >= 0");
    const TimeGrid& grid = h.grid;
    const std::size_t L = static_cast<std::size_t>(n_hi - n_lo + 1);
    std::vector<Regularization> regs;
    for (int n = n_lo; n <= n_hi; ++n) {
        regs.push_back(Regularization::at_level(n, eps0));
        check_resolution(grid, regs.back());
    }
    std::vector<std::vector<double>> jhat(L, std::vector<double>(replicas));
    std::vector<std::vector<double>> lw(L, std::vector<double>(replicas, 0.0));
    parallel_for(replicas, [&](std::size_t i) {
        const Path path = sample_wiener(grid, seed, i);
        for (std::size_t l = 0; l < L; ++l) {
            jhat[l][i] = j_hat(path, u1, u2, h, regs[l]);
            if (lambda > 0) lw[l][i] = -lambda * local_time(path, regs[l]).value;
        }
    });
    DecayReport rep;
    std::vector<double> ms, ls, lws;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        std::vector<double> d(replicas);
        for (std::size_t i = 0; i < replicas; ++i) d[i] = std::pow(std::abs(jhat[l + 1][i] - jhat[l][i]), p);
        const auto plain = mean_se(d);
        const auto ens = make_ensemble(grid, seed, lw[l]);
        const auto weighted = ens.mean(d);
        DecayRow row;
        row.level = regs[l].level.value_or(0);
        row.moment = plain.mean;
        row.moment_se = plain.se;
        row.weighted_moment = weighted.mean;
        row.weighted_se = weighted.se;
        rep.rows.push_back(row);
    }
    bool positive = true;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        positive = positive && rep.rows[r].moment > 0 && rep.rows[r].weighted_moment > 0;
        if (r + 1 < rep.rows.size()) {
            rep.ratios.push_back(rep.rows[r].moment / rep.rows[r + 1].moment);
            rep.weighted_ratios.push_back(rep.rows[r].weighted_moment / rep.rows[r + 1].weighted_moment);
        }
    }
    if (positive && rep.rows.size() >= 2) {
        std::vector<double> x, y, yw;
        for (const auto& row : rep.rows) {
            x.push_back(row.level);
            y.push_back(-std::log2(row.moment));
            yw.push_back(-std::log2(row.weighted_moment));
        }
        rep.decay_exponent = linear_fit(x, y).slope;
        rep.weighted_decay_exponent = linear_fit(x, yw).slope;
    }
    return rep;
}

}  // namespace polymer
