#include "polymer_cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "polymer/error.hpp"
#include "polymer/girsanov.hpp"
#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/oracle.hpp"
#include "polymer/parallel.hpp"
#include "polymer/quantize.hpp"
#include "polymer/renorm.hpp"
#include "polymer/stats.hpp"

namespace polymer::cli {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double base_replicas = 20000.0;

const char* preset_name(DirectionPreset p) {
    switch (p) {
        case DirectionPreset::linear: return "linear";
        case DirectionPreset::sine: return "sine";
        case DirectionPreset::poly: return "poly";
    }
    return "?";
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }
std::string yes_no(bool b) { return b ? "true" : "false"; }

class Suite {
public:
    Suite(const VerifyConfig& cfg, std::ostream* progress) : cfg_(cfg), progress_(progress) {}

    VerifyReport run() {
        add(mean_closed_form());
        add(k1_reproduction());
        add(variance_slope());
        add(kappa2_slope());
        add(cameron_martin());
        add(sampler_agreement());
        add(gradient_check());
        add(moment_decay());
        add(toy_detailed_balance());
        schedule_diagnostics();
        return std::move(report_);
    }

private:
    std::size_t scaled(double base, std::size_t floor = 2) const {
        const double v = std::round(base * static_cast<double>(cfg_.replicas) / base_replicas);
        return std::max<std::size_t>(floor, static_cast<std::size_t>(v));
    }
    std::uint64_t seed(std::uint64_t tag) const { return mix_seed(cfg_.seed, tag); }
    TimeGrid grid_for(double a, double eps) const {
        const auto g = TimeGrid::resolving(a, eps);
        return g.n_steps() >= cfg_.n_steps ? g : TimeGrid(cfg_.n_steps);
    }

    void add(CriterionResult r) {
        if (progress_) *progress_ << "  [" << r.id << "] " << (r.pass ? "pass" : "FAIL") << "  " << r.name << ": "
                                  << r.detail << std::endl;
        report_.criteria.push_back(std::move(r));
    }

    CriterionResult mean_closed_form() {
        const double eps[3] = {0.2, 0.1, 0.05};
        const double as[3] = {0.1, 0.05, 0.02};
        const TimeGrid grid = grid_for(0.02, 0.05);
        const std::size_t M = scaled(20000);
        const std::uint64_t s = seed(1);
        std::vector<std::vector<double>> vals(9, std::vector<double>(M));
        parallel_for(M, [&](std::size_t m) {
            const auto J = local_time_batch(sample_wiener(grid, s, m), eps, as);
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) vals[3 * i + k][m] = J[i][k];
        });
        CsvTable t("c1_mean.csv", "Monte Carlo mean of J^{eps,a} against its closed form",
                   {{"eps", "time", "diagonal cutoff"},
                    {"a", "time", "kernel variance"},
                    {"replicas", "count", "Wiener paths"},
                    {"n_steps", "count", "time grid steps"},
                    {"mc_mean", "1", "sample mean of J^{eps,a}"},
                    {"mc_se", "1", "standard error of mc_mean"},
                    {"exact_mean", "1", "int_eps^1 (1-r) (2 pi (a+r))^{-3/2} dr"},
                    {"exact_mean_grid", "1", "pair weights applied to p_{a+|tau-sigma|}(0)"},
                    {"z", "1", "(mc_mean - exact_mean) / mc_se"},
                    {"pass", "bool", "|z| <= 3"}});
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) {
                const auto ms = mean_se(vals[3 * i + k]);
                const double ex = exact_mean_J(eps[i], as[k]);
                const double z = (ms.mean - ex) / ms.se;
                const bool p = std::abs(z) <= 3.0;
                ok = ok && p;
                worst = std::max(worst, std::abs(z));
                t.add_row({eps[i], as[k], as_int(M), as_int(grid.n_steps()), ms.mean, ms.se, ex,
                           exact_mean_J_discrete(grid, Regularization::fixed(eps[i], as[k])), z, yes_no(p)});
            }
        }
        report_.tables.push_back(std::move(t));
        return {1, "closed-form mean", ok, "max |z| = " + fmt(worst) + " over 9 (eps, a), M = " + std::to_string(M)};
    }

    CriterionResult k1_reproduction() {
        const double eps[3] = {0.2, 0.1, 0.05};
        MonteCarloOptions opt;
        opt.replicas = scaled(10000);
        opt.seed = seed(2);
        opt.a = 0.02;
        opt.richardson_levels = 3;
        const auto pts = estimate_K1(eps, opt);
        const double K1 = -2.0 * std::pow(2 * pi, -1.5);
        CsvTable t("c2_k1.csv", "Extrapolated E[J^eps] - kappa1(eps) against 2 (2 pi)^{-3/2} (sqrt(eps) - 1)",
                   {{"eps", "time", "diagonal cutoff"},
                    {"estimate", "1", "a -> 0 extrapolation of E[J^{eps,a}] - kappa1(eps) from a, a/2, a/4"},
                    {"se", "1", "standard error of estimate"},
                    {"analytic", "1", "2 (2 pi)^{-3/2} (sqrt(eps) - 1)"},
                    {"z", "1", "(estimate - analytic) / se"},
                    {"pass", "bool", "|z| <= 3"}});
        bool ok = true;
        std::vector<double> x, y, sig;
        for (const auto& p : pts) {
            const double z = (p.estimate - p.analytic) / p.se;
            const bool pp = std::abs(z) <= 3.0;
            ok = ok && pp;
            t.add_row({p.eps, p.estimate, p.se, p.analytic, z, yes_no(pp)});
            x.push_back(std::sqrt(p.eps));
            y.push_back(p.estimate);
            sig.push_back(p.se);
        }
        report_.tables.push_back(std::move(t));
        // The analytic curve is linear in sqrt(eps); its intercept is K1.
        const auto fit = linear_fit(x, y, sig);
        const double half_width = 3.0 * fit.intercept_se + 0.1 * std::abs(K1);
        const bool bracket = std::abs(fit.intercept - K1) <= half_width;
        CsvTable f("c2_k1_limit.csv", "Limit of E[J^eps] - kappa1(eps) as eps -> 0",
                   {{"intercept", "1", "weighted fit of the estimates against sqrt(eps), value at 0"},
                    {"intercept_se", "1", "standard error of intercept"},
                    {"slope", "1", "fitted coefficient of sqrt(eps)"},
                    {"K1", "1", "-2 (2 pi)^{-3/2}"},
                    {"half_width", "1", "3 intercept_se + 0.1 |K1|"},
                    {"pass", "bool", "|intercept - K1| <= half_width"}});
        f.add_row({fit.intercept, fit.intercept_se, fit.slope, K1, half_width, yes_no(bracket)});
        report_.tables.push_back(std::move(f));
        return {2, "K1 reproduction", ok && bracket,
                "points " + std::string(ok ? "within" : "outside") + " 3 SE; limit " + fmt(fit.intercept, 5) +
                    " +- " + fmt(half_width, 3) + " vs " + fmt(K1, 5)};
    }

    CriterionResult variance_slope() {
        const double eps[3] = {0.04, 0.02, 0.01};
        const double a = 0.01;
        const double target = -2.0 / (4 * pi * pi);
        std::vector<double> x, v, se;
        CsvTable t("c3_variance.csv", "Var(J^{eps,a}) against log eps at a = 0.01",
                   {{"eps", "time", "diagonal cutoff"},
                    {"oracle_variance", "1", "E[J^2] - E[J]^2 by cubature of the Gaussian pair density"},
                    {"oracle_error", "1", "cubature error estimate of oracle_variance"},
                    {"mc_variance", "1", "sample variance of J^{eps,a}"},
                    {"mc_variance_se", "1", "delta-method standard error of mc_variance"}});
        for (double e : eps) {
            const auto r = exact_variance_J(e, a);
            x.push_back(std::log(e));
            v.push_back(r.value);
            se.push_back(r.error);
        }
        const auto oracle_fit = linear_fit(x, v);
        MonteCarloOptions opt;
        opt.replicas = scaled(4000);
        opt.seed = seed(3);
        opt.a = a;
        opt.richardson_levels = 1;
        const auto mc = estimate_var_slope(eps, opt);
        for (std::size_t i = 0; i < 3; ++i) t.add_row({eps[i], v[i], se[i], mc.variance[i], mc.variance_se[i]});
        report_.tables.push_back(std::move(t));
        const double oracle_rel = std::abs(oracle_fit.slope - target) / std::abs(target);
        const double mc_rel = std::abs(mc.slope - target) / std::abs(target);
        const bool ok = oracle_rel <= 0.10 && mc_rel <= 0.20;
        CsvTable f("c3_slope.csv", "Slope of Var(J^{eps,a}) in log eps against -2 (2 pi)^{-2}",
                   {{"source", "-", "oracle or monte_carlo"},
                    {"slope", "1", "least-squares d Var / d log eps"},
                    {"slope_se", "1", "standard error of slope"},
                    {"target", "1", "-2 (2 pi)^{-2}"},
                    {"rel_error", "1", "|slope - target| / |target|"},
                    {"tolerance", "1", "allowed rel_error"}});
        f.add_row({std::string("oracle"), oracle_fit.slope, oracle_fit.slope_se, target, oracle_rel, 0.10});
        f.add_row({std::string("monte_carlo"), mc.slope, mc.slope_se, target, mc_rel, 0.20});
        report_.tables.push_back(std::move(f));
        return {3, "variance log-slope", ok,
                "oracle slope " + fmt(oracle_fit.slope) + " (" + fmt(100 * oracle_rel, 3) + "% off), MC slope " +
                    fmt(mc.slope) + " (" + fmt(100 * mc_rel, 3) + "% off), target " + fmt(target, 5)};
    }

    CriterionResult kappa2_slope() {
        const double target = -1.0 / (4 * pi * pi);
        CsvTable t("c4_kappa2_slope.csv", "eps d kappa2 / d eps against -(2 pi)^{-2}",
                   {{"eps", "time", "diagonal cutoff"},
                    {"step", "time", "central difference half-step"},
                    {"central_difference", "1", "eps (kappa2(eps+h) - kappa2(eps-h)) / 2h"},
                    {"reduced_derivative", "1", "eps d kappa2 / d eps from the one-dimensional reduction"},
                    {"target", "1", "-(2 pi)^{-2}"},
                    {"rel_error", "1", "|central_difference - target| / |target|"},
                    {"pass", "bool", "rel_error <= 0.05"}});
        bool ok = true;
        std::string detail;
        for (double e : {0.01, 0.005}) {
            const double h = 0.01 * e;
            const double cd = e * (kappa2(e + h, 1e-10) - kappa2(e - h, 1e-10)) / (2 * h);
            const double rel = std::abs(cd - target) / std::abs(target);
            const bool p = rel <= 0.05;
            ok = ok && p;
            t.add_row({e, h, cd, e * kappa2_derivative(e), target, rel, yes_no(p)});
            detail += (detail.empty() ? "" : ", ") + std::string("eps=") + fmt(e, 2) + ": " + fmt(cd, 5) + " (" +
                      fmt(100 * rel, 2) + "% off)";
        }
        report_.tables.push_back(std::move(t));
        return {4, "kappa2 slope", ok, detail + ", target " + fmt(target, 5)};
    }

    CriterionResult cameron_martin() {
        const auto reg = Regularization::fixed(0.1, 0.05);
        const TimeGrid grid = grid_for(reg.a, reg.eps);
        const auto h = preset_direction(cfg_.direction_preset, grid);
        const std::size_t M = scaled(50000);
        struct Obs {
            const char* name;
            Observable f;
        };
        const Obs obs[3] = {{"end_to_end_sq", end_to_end_sq},
                            {"midpoint_gaussian", midpoint_gaussian},
                            {"cylinder", cylinder_observable}};
        CsvTable t("c5_cameron_martin.csv", "E[f(w + u h)] against E[f(w) exp(V(u,h))] under Wiener measure",
                   {{"observable", "-", "f"},
                    {"direction", "-", "h"},
                    {"u", "1", "shift size"},
                    {"lhs", "1", "E[f(w + u h)]"},
                    {"rhs", "1", "E[f(w) exp(u int h' dw - u^2/2 int |h'|^2 dt)]"},
                    {"combined_se", "1", "standard error of lhs - rhs on shared paths"},
                    {"z", "1", "(lhs - rhs) / combined_se"},
                    {"pass", "bool", "|z| <= 3"}});
        bool ok = true;
        double worst = 0.0;
        std::uint64_t tag = 50;
        for (const auto& o : obs) {
            for (double u : {0.5, -1.0}) {
                const auto r = quasi_invariance_check(o.f, u, h, 0.0, reg, M, seed(tag++));
                const double z = (r.lhs - r.rhs) / r.combined_se;
                ok = ok && r.pass;
                worst = std::max(worst, std::abs(z));
                t.add_row({std::string(o.name), std::string(preset_name(cfg_.direction_preset)), u, r.lhs, r.rhs,
                           r.combined_se, z, yes_no(r.pass)});
            }
        }
        report_.tables.push_back(std::move(t));
        return {5, "Cameron-Martin exactness", ok,
                "max |z| = " + fmt(worst) + " over 6 combinations, M = " + std::to_string(M)};
    }

    CriterionResult sampler_agreement() {
        const auto reg = Regularization::fixed(0.1, 0.05);
        const double lambda = cfg_.lambda;
        const TimeGrid grid = grid_for(reg.a, reg.eps);
        const Observable obs[2] = {end_to_end_sq, midpoint_gaussian};
        const char* names[2] = {"end_to_end_sq", "midpoint_gaussian"};
        struct Row {
            std::string method;
            MeanSe m[2];
            double diagnostic;
        };
        std::vector<Row> rows;

        const auto ens = importance_sample(grid, reg, lambda, scaled(20000), seed(60));
        Row is{"importance", {}, ens.ess};
        for (int k = 0; k < 2; ++k) is.m[k] = ens.mean(obs[k]);
        rows.push_back(is);

        ChainOptions copt;
        copt.chains = 4;
        copt.steps = scaled(50000, 200);
        copt.burn_in = scaled(1000, 20);
        copt.seed = seed(61);
        const auto pcn = run_pcn(grid, reg, lambda, cfg_.beta_pcn, obs, copt);
        Row pr{"pcn", {}, pcn.acceptance_rate};
        for (int k = 0; k < 2; ++k) pr.m[k] = chain_mean(pcn.series[k], copt.chains);
        rows.push_back(pr);

        LangevinConfig lc;
        lc.reg = reg;
        lc.lambda = lambda;
        lc.tau = cfg_.tau_langevin;
        copt.seed = seed(62);
        const auto mala = run_langevin(grid, lc, obs, copt);
        Row mr{"mala", {}, mala.acceptance_rate};
        for (int k = 0; k < 2; ++k) mr.m[k] = chain_mean(mala.series[k], copt.chains);
        rows.push_back(mr);

        CsvTable t("c6_samplers.csv", "Observables of nu_{eps,lambda} from three samplers",
                   {{"method", "-", "importance, pcn or mala"},
                    {"observable", "-", "|w_1|^2 or exp(-|w_{1/2}|^2)"},
                    {"mean", "1", "estimate of the expectation under exp(-Jbar) dW / Z"},
                    {"se", "1", "standard error (batch means for chains)"},
                    {"diagnostic", "1", "effective sample size or acceptance rate"}});
        for (const auto& r : rows)
            for (int k = 0; k < 2; ++k) t.add_row({r.method, std::string(names[k]), r.m[k].mean, r.m[k].se, r.diagnostic});
        report_.tables.push_back(std::move(t));

        CsvTable d("c6_pairs.csv", "Pairwise sampler differences",
                   {{"first", "-", "method"},
                    {"second", "-", "method"},
                    {"observable", "-", "f"},
                    {"difference", "1", "mean_first - mean_second"},
                    {"combined_se", "1", "sqrt(se_first^2 + se_second^2)"},
                    {"pass", "bool", "|difference| <= 3 combined_se"}});
        bool ok = true;
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = i + 1; j < rows.size(); ++j) {
                for (int k = 0; k < 2; ++k) {
                    const double diff = rows[i].m[k].mean - rows[j].m[k].mean;
                    const double cse = combined_se(rows[i].m[k].se, rows[j].m[k].se);
                    const bool p = std::abs(diff) <= 3.0 * cse;
                    ok = ok && p;
                    worst = std::max(worst, std::abs(diff) / cse);
                    d.add_row({rows[i].method, rows[j].method, std::string(names[k]), diff, cse, yes_no(p)});
                }
            }
        }
        report_.tables.push_back(std::move(d));
        return {6, "sampler cross-validation", ok,
                "max |diff| / combined SE = " + fmt(worst) + " (pCN acceptance " + fmt(pcn.acceptance_rate, 3) +
                    ", MALA acceptance " + fmt(mala.acceptance_rate, 3) + ", IS ESS " + fmt(ens.ess, 5) + ")"};
    }

    CriterionResult gradient_check() {
        const TimeGrid grid(64);
        const auto reg = Regularization::fixed(0.2, 0.1);
        const double step = 1e-5;
        CsvTable t("c7_gradient.csv", "Analytic gradient of J against central differences",
                   {{"path", "count", "replica index"},
                    {"max_abs_gradient", "1", "max over nodes and coordinates of |dJ/dw|"},
                    {"max_abs_error", "1", "max |analytic - central difference|"},
                    {"rel_error", "1", "max_abs_error / max |central difference|"},
                    {"pass", "bool", "rel_error <= 1e-6"}});
        bool ok = true;
        double worst = 0.0;
        const std::uint64_t s = seed(70);
        for (std::size_t r = 0; r < 10; ++r) {
            const auto path = sample_wiener(grid, s, r);
            const auto grad = local_time_gradient(path, reg);
            std::vector<Vec3> pos(path.positions().begin(), path.positions().end());
            double err = 0.0, scale = 0.0;
            for (std::size_t i = 1; i < pos.size(); ++i) {
                for (int k = 0; k < 3; ++k) {
                    auto up = pos, dn = pos;
                    up[i][k] += step;
                    dn[i][k] -= step;
                    const double fd =
                        (local_time(Path(grid, up), reg).value - local_time(Path(grid, dn), reg).value) / (2 * step);
                    err = std::max(err, std::abs(fd - grad[i][k]));
                    scale = std::max(scale, std::abs(fd));
                }
            }
            const double rel = err / scale;
            const bool p = rel <= 1e-6;
            ok = ok && p;
            worst = std::max(worst, rel);
            t.add_row({as_int(r), scale, err, rel, yes_no(p)});
        }
        report_.tables.push_back(std::move(t));
        return {7, "gradient correctness", ok, "max relative error " + fmt(worst, 3) + " on 10 paths, N = 64"};
    }

    CriterionResult moment_decay() {
        const int lo = cfg_.levels_lo, hi = cfg_.levels_hi;
        const auto finest = Regularization::at_level(hi + 1, cfg_.eps0);
        const TimeGrid grid = grid_for(finest.a, finest.eps);
        const auto h = preset_direction(cfg_.direction_preset, grid);
        const std::size_t M = scaled(1000);
        const double u1 = 1.0, u2 = -1.0;
        CsvTable t("c8_decay.csv", "E|Jhat_{m+1} - Jhat_m|^2 along the schedule eps_m = 2^{-eps0 m}, a_m = 2^{-m}",
                   {{"seed_index", "count", "repetition"},
                    {"level", "count", "m"},
                    {"eps_m", "time", "2^{-eps0 m}"},
                    {"a_m", "time", "2^{-m}"},
                    {"moment", "1", "E_0 |Jhat_{m+1} - Jhat_m|^2, Jhat = J(w + u1 h) - J(w + u2 h)"},
                    {"moment_se", "1", "standard error of moment"},
                    {"weighted_moment", "1", "same under weights exp(-lambda J_{eps_m,a_m}) normalized"},
                    {"weighted_se", "1", "standard error of weighted_moment"},
                    {"ratio", "1", "moment_m / moment_{m+1}"},
                    {"weighted_ratio", "1", "weighted_moment_m / weighted_moment_{m+1}"}});
        int plain_ok = 0, weighted_ok = 0;
        std::string ratios;
        for (int s = 0; s < 5; ++s) {
            const auto rep = moment_decay_report(u1, u2, h, cfg_.lambda, 2, lo, hi + 1, cfg_.eps0, M,
                                                 seed(80 + static_cast<std::uint64_t>(s)));
            bool p = true, w = true;
            for (std::size_t r = 0; r < rep.rows.size(); ++r) {
                const auto& row = rep.rows[r];
                const auto reg = Regularization::at_level(row.level, cfg_.eps0);
                const double ratio = r < rep.ratios.size() ? rep.ratios[r] : std::nan("");
                const double wratio = r < rep.weighted_ratios.size() ? rep.weighted_ratios[r] : std::nan("");
                if (r < rep.ratios.size()) {
                    p = p && ratio >= 1.5;
                    w = w && wratio >= 1.5;
                }
                t.add_row({std::int64_t{s}, std::int64_t{row.level}, reg.eps, reg.a, row.moment, row.moment_se,
                           row.weighted_moment, row.weighted_se, ratio, wratio});
            }
            plain_ok += p;
            weighted_ok += w;
            if (s == 0) {
                for (double r : rep.ratios) ratios += (ratios.empty() ? "" : ", ") + fmt(r, 3);
            }
        }
        report_.tables.push_back(std::move(t));
        const bool ok = plain_ok >= 4 && weighted_ok >= 4;
        return {8, "moment decay", ok,
                "seeds with every ratio >= 1.5: " + std::to_string(plain_ok) + "/5 plain, " +
                    std::to_string(weighted_ok) + "/5 weighted; first seed ratios " + ratios};
    }

    CriterionResult toy_detailed_balance() {
        const auto r = toy_pcn_stationarity(cfg_.lambda, 0.8);
        CsvTable t("c9_toy_chain.csv", "Tabulated pCN chain on the two-step toy space",
                   {{"states", "count", "grid points of the whitened increments"},
                    {"iterations", "count", "power iterations"},
                    {"tv_to_target", "1", "total variation between the iterate and pi0 exp(-lambda J) / Z"},
                    {"tv_last_step", "1", "total variation between the last two iterates"},
                    {"tv_prior_target", "1", "total variation between pi0 and the target"},
                    {"pass", "bool", "tv_to_target <= 1e-6"}});
        const bool ok = r.tv_to_target <= 1e-6;
        t.add_row({as_int(r.states), as_int(r.iterations), r.tv_to_target, r.tv_last_step, r.tv_prior_target,
                   yes_no(ok)});
        report_.tables.push_back(std::move(t));
        return {9, "detailed-balance oracle", ok,
                "TV " + fmt(r.tv_to_target, 3) + " after " + std::to_string(r.iterations) + " iterations on " +
                    std::to_string(r.states) + " states (target differs from prior by " + fmt(r.tv_prior_target, 3) +
                    ")"};
    }

    // Not a criterion: share of paths cut by the truncation indicator.
    void schedule_diagnostics() {
        CsvTable t("mu_levels.csv", "Truncated measures mu_{n,lambda} along the schedule",
                   {{"level", "count", "n"},
                    {"replicas", "count", "Wiener paths"},
                    {"truncated_fraction", "1", "share of paths with |J(a_n) - J(a_n -> 0)| > 2^{-delta1 n}"},
                    {"log_normalizer", "1", "log of the mean of exp(-Jbar 1{kept})"},
                    {"ess", "count", "effective sample size"}});
        const std::size_t M = scaled(200);
        for (int n = cfg_.levels_lo; n <= cfg_.levels_hi; ++n) {
            const auto mu = mu_n_ensemble(n, cfg_.lambda, cfg_.delta1, cfg_.eps0, M,
                                          seed(90 + static_cast<std::uint64_t>(n)));
            t.add_row({std::int64_t{n}, as_int(M), mu.truncated_fraction, mu.ensemble.log_normalizer, mu.ensemble.ess});
        }
        report_.tables.push_back(std::move(t));
    }

    const VerifyConfig& cfg_;
    std::ostream* progress_;
    VerifyReport report_;
};

}  // namespace

VerifyConfig VerifyConfig::from_config(const Config& c) {
    c.require_known({"lambda", "eps0", "n_steps", "replicas", "levels_lo", "levels_hi", "seed", "beta_pcn",
                     "tau_langevin", "delta1", "direction_preset", "output_dir"});
    if (!c.has("seed")) throw ConfigError("verify: seed is required");
    VerifyConfig v;
    v.lambda = c.get_double("lambda", v.lambda);
    v.eps0 = c.get_double("eps0", v.eps0);
    const auto n = c.get_int("n_steps", static_cast<std::int64_t>(v.n_steps));
    const auto m = c.get_int("replicas", static_cast<std::int64_t>(v.replicas));
    if (n <= 0 || m <= 0) throw ConfigError("verify: n_steps and replicas must be positive");
    v.n_steps = static_cast<std::size_t>(n);
    v.replicas = static_cast<std::size_t>(m);
    v.levels_lo = static_cast<int>(c.get_int("levels_lo", v.levels_lo));
    v.levels_hi = static_cast<int>(c.get_int("levels_hi", v.levels_hi));
    v.seed = c.get_seed("seed", 0);
    v.beta_pcn = c.get_double("beta_pcn", v.beta_pcn);
    v.tau_langevin = c.get_double("tau_langevin", v.tau_langevin);
    v.delta1 = c.get_double("delta1", v.delta1);
    try {
        v.direction_preset = parse_direction_preset(c.get_string("direction_preset", "sine"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("verify: ") + e.what());
    }
    v.output_dir = c.get_string("output_dir", v.output_dir);
    v.validate();
    return v;
}

void VerifyConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("verify: " + m); };
    if (!(lambda >= 0)) fail("lambda must be >= 0");
    if (!(eps0 > 0 && eps0 < 1.0 / 21.0)) fail("eps0 must lie in (0, 1/21)");
    if (n_steps < 64 || (n_steps & (n_steps - 1)) != 0 || n_steps > 2048)
        fail("n_steps must be a power of two in [64, 2048]");
    if (replicas < 100 || replicas > 100000) fail("replicas must lie in [100, 100000]");
    if (levels_lo < 0 || levels_hi < levels_lo + 2 || levels_hi > 8)
        fail("need 0 <= levels_lo, levels_hi >= levels_lo + 2, levels_hi <= 8");
    if (!(beta_pcn > 0 && beta_pcn <= 1)) fail("beta_pcn must lie in (0, 1]");
    const auto reg = Regularization::fixed(0.1, 0.05);
    const auto grid = TimeGrid::resolving(reg.a, reg.eps);
    const double dt = (grid.n_steps() >= n_steps ? grid : TimeGrid(n_steps)).dt();
    if (!(tau_langevin > 0 && tau_langevin <= dt * (1 + 1e-12)))
        fail("tau_langevin must lie in (0, dt] for the sampler grid (dt = " + fmt(dt, 6) + ")");
    if (!(delta1 > 0 && delta1 < 1.0 / 200.0)) fail("delta1 must lie in (0, 1/200)");
    if (output_dir.empty()) fail("output_dir must not be empty");
}

nlohmann::json VerifyConfig::to_json() const {
    return {{"lambda", lambda},
            {"eps0", eps0},
            {"n_steps", n_steps},
            {"replicas", replicas},
            {"levels_lo", levels_lo},
            {"levels_hi", levels_hi},
            {"seed", seed},
            {"beta_pcn", beta_pcn},
            {"tau_langevin", tau_langevin},
            {"delta1", delta1},
            {"direction_preset", preset_name(direction_preset)},
            {"output_dir", output_dir}};
}

VerifyConfig VerifyConfig::reduced() const {
    VerifyConfig r = *this;
    r.replicas = 400;
    return r;
}

bool VerifyReport::all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

VerifyReport run_verify(const VerifyConfig& cfg, const VerifyOptions& opt) {
    cfg.validate();
    VerifyReport report = Suite(cfg, opt.progress).run();
    if (opt.determinism_check) {
        if (opt.progress) *opt.progress << "  determinism: two reduced runs" << std::endl;
        const auto small = cfg.reduced();
        const auto first = Suite(small, nullptr).run();
        const auto second = Suite(small, nullptr).run();
        CsvTable t("c10_determinism.csv", "Two reduced runs with identical configuration",
                   {{"file", "-", "table"},
                    {"sha1_first", "-", "git blob hash of the first run"},
                    {"sha1_second", "-", "git blob hash of the second run"},
                    {"identical", "bool", "bodies are byte-identical"}});
        bool ok = first.tables.size() == second.tables.size();
        for (std::size_t i = 0; ok && i < first.tables.size(); ++i) {
            const auto a = first.tables[i].render();
            const auto b = second.tables[i].render();
            t.add_row({first.tables[i].file_name(), git_blob_hash(a), git_blob_hash(b), yes_no(a == b)});
            ok = ok && a == b;
        }
        report.tables.push_back(std::move(t));
        CriterionResult c{10, "determinism", ok,
                          std::to_string(first.tables.size()) + " CSVs " + (ok ? "bit-identical" : "differ") +
                              " across two runs at replicas = " + std::to_string(small.replicas)};
        if (opt.progress) *opt.progress << "  [10] " << (ok ? "pass" : "FAIL") << "  " << c.name << ": " << c.detail << std::endl;
        report.criteria.push_back(std::move(c));
    }
    return report;
}

ToyChainResult toy_pcn_stationarity(double lambda, double beta, int points_per_axis) {
    if (!(beta > 0 && beta < 1)) throw InvalidArgument("toy chain: beta must lie in (0, 1)");
    if (points_per_axis < 2) throw InvalidArgument("toy chain: need at least 2 points per axis");
    const int P = points_per_axis;
    const double rho = std::sqrt(1 - beta * beta);
    std::vector<double> axis(P);
    for (int i = 0; i < P; ++i) axis[i] = -1.5 + 3.0 * i / (P - 1);
    // One step's whitened increment lives on a P^3 grid; a state is a pair.
    const std::size_t S1 = static_cast<std::size_t>(P) * P * P;
    const std::size_t S = S1 * S1;
    std::vector<Vec3> pts(S1);
    for (std::size_t k = 0; k < S1; ++k) pts[k] = {axis[k % P], axis[(k / P) % P], axis[k / (P * P)]};
    // Unnormalized pCN kernel factor per step: exp(-|b - rho a|^2 / 2 beta^2).
    std::vector<double> Q(S1 * S1);
    for (std::size_t a = 0; a < S1; ++a)
        for (std::size_t b = 0; b < S1; ++b) Q[a * S1 + b] = std::exp(-norm2(pts[b] - rho * pts[a]) / (2 * beta * beta));

    const TimeGrid grid(2);
    Regularization reg = Regularization::fixed(0.5, 0.5);
    reg.unsafe_resolution = true;
    const double sdt = std::sqrt(grid.dt());
    std::vector<double> J(S), target(S), prior(S);
    for (std::size_t s = 0; s < S; ++s) {
        const Vec3& z1 = pts[s / S1];
        const Vec3& z2 = pts[s % S1];
        const Vec3 w1 = sdt * z1;
        const Path path(grid, {Vec3{}, w1, w1 + sdt * z2});
        J[s] = local_time(path, reg).value;
        prior[s] = std::exp(-0.5 * (norm2(z1) + norm2(z2)));
        target[s] = prior[s] * std::exp(-lambda * J[s]);
    }
    const double zt = pairwise_sum(target), zp = pairwise_sum(prior);
    for (std::size_t s = 0; s < S; ++s) {
        target[s] /= zt;
        prior[s] /= zp;
    }
    auto q = [&](std::size_t s, std::size_t t) { return Q[(s / S1) * S1 + t / S1] * Q[(s % S1) * S1 + t % S1]; };
    double max_row = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        double row = 0.0;
        for (std::size_t t = 0; t < S; ++t) row += q(s, t);
        max_row = std::max(max_row, row);
    }
    // Transition s -> t is the scaled proposal times the Metropolis
    // acceptance, with the remaining mass on the diagonal. Stored as
    // T[t * S + s] so the update below reads contiguously.
    const double c = 1.0 / max_row;
    std::vector<double> T(S * S);
    parallel_for(S, [&](std::size_t s) {
        double off = 0.0;
        for (std::size_t t = 0; t < S; ++t) {
            if (t == s) continue;
            const double p = c * q(s, t) * std::exp(pcn_log_acceptance(J[s], J[t], lambda));
            T[t * S + s] = p;
            off += p;
        }
        T[s * S + s] = 1.0 - off;
    });

    ToyChainResult out;
    out.states = S;
    std::vector<double> v(S, 1.0 / static_cast<double>(S)), next(S);
    auto tv = [S](const std::vector<double>& x, const std::vector<double>& y) {
        double d = 0.0;
        for (std::size_t i = 0; i < S; ++i) d += std::abs(x[i] - y[i]);
        return 0.5 * d;
    };
    for (std::size_t it = 1; it <= 100000; ++it) {
        parallel_for(S, [&](std::size_t t) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s) acc += v[s] * T[t * S + s];
            next[t] = acc;
        });
        out.tv_last_step = tv(next, v);
        v.swap(next);
        out.iterations = it;
        if (out.tv_last_step < 1e-14) break;
    }
    out.tv_to_target = tv(v, target);
    out.tv_prior_target = tv(prior, target);
    return out;
}

}  // namespace polymer::cli
