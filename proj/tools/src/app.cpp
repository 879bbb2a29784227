#include "polymer_cli/app.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <random>
#include <set>

#include "polymer/error.hpp"
#include "polymer/girsanov.hpp"
#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/oracle.hpp"
#include "polymer/parallel.hpp"
#include "polymer/quantize.hpp"
#include "polymer/renorm.hpp"
#include "polymer/stats.hpp"
#include "polymer_cli/config.hpp"
#include "polymer_cli/output.hpp"
#include "polymer_cli/verify.hpp"

namespace polymer::cli {

namespace {

using Keys = std::set<std::string>;

struct Observables {
    std::vector<std::string> names{"end_to_end_sq", "midpoint_gaussian", "cylinder"};
    std::vector<Observable> fns{end_to_end_sq, midpoint_gaussian, cylinder_observable};
};

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

std::size_t positive(const Config& c, const std::string& key, std::int64_t fallback) {
    const auto v = c.get_int(key, fallback);
    if (v <= 0) throw ConfigError("config: " + key + " must be positive");
    return static_cast<std::size_t>(v);
}

std::uint64_t seed_or_random(const Config& c) {
    if (c.has("seed")) return c.get_seed("seed", 0);
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Regularization regularization(const Config& c, double eps, double a) {
    Regularization reg;
    if (c.has("level")) {
        reg = Regularization::at_level(static_cast<int>(c.get_int("level", 0)), c.get_double("eps0", 1.0 / 22.0));
    } else {
        reg = Regularization::fixed(c.get_double("eps", eps), c.get_double("a", a));
    }
    reg.validate();
    return reg;
}

TimeGrid grid_or_resolving(const Config& c, const Regularization& reg, std::int64_t fallback) {
    const auto n = c.get_int("n_steps", fallback);
    if (n < 0) throw ConfigError("config: n_steps must be >= 0");
    const TimeGrid g = n > 0 ? TimeGrid(static_cast<std::size_t>(n)) : TimeGrid::resolving(reg.a, reg.eps);
    check_resolution(g, reg);
    return g;
}

nlohmann::json config_echo(const Config& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : c.values()) j[k] = v;
    return j;
}

RunArtifacts run_renorm(const Config& c) {
    c.require_known({"eps", "rtol", "method", "k1_study", "k1_eps", "var_study", "var_eps", "replicas", "a",
                     "richardson_levels", "n_steps", "seed", "output_dir"});
    const auto eps = c.get_list("eps", {0.25, 0.0625});
    const double rtol = c.get_double("rtol", 1e-7);
    const std::string method = c.get_string("method", "quadrature");
    if (method != "quadrature" && method != "derivative_integration")
        throw ConfigError("renorm: method must be quadrature or derivative_integration");
    for (double e : eps)
        if (!(e > 0 && e < 1)) throw ConfigError("renorm: eps values must lie in (0, 1)");
    if (method == "derivative_integration")
        for (double e : eps)
            if (e > 0.5) throw ConfigError("renorm: derivative_integration needs eps <= 1/2");
    const bool k1 = c.get_bool("k1_study", false);
    const bool var = c.get_bool("var_study", false);
    MonteCarloOptions opt;
    opt.replicas = positive(c, "replicas", 2000);
    opt.a = c.get_double("a", 0.02);
    opt.richardson_levels = static_cast<int>(c.get_int("richardson_levels", 3));
    opt.n_steps = static_cast<std::size_t>(c.get_int("n_steps", 0));
    opt.seed = seed_or_random(c);
    const auto k1_eps = c.get_list("k1_eps", {0.2, 0.1, 0.05});
    const auto var_eps = c.get_list("var_eps", {0.04, 0.02, 0.01});

    RunArtifacts run;
    run.subcommand = "renorm";
    run.seeds = {{"seed", opt.seed}};
    CsvTable t("kappa.csv", "Renormalization constants",
               {{"eps", "time", "diagonal cutoff"},
                {"kappa1", "1", "int_eps^1 p_t(0) dt = 2 (2 pi)^{-3/2} (eps^{-1/2} - 1)"},
                {"kappa2", "1", "(2 pi)^{-3} triple integral of (s1(s2-s1) + s1(s3-s2) + (s3-s2)(s2-s1))^{-3/2}"},
                {"method", "-", "quadrature or derivative_integration"},
                {"rtol_achieved", "1", "error estimate of kappa2 relative to kappa2"}});
    for (double e : eps) {
        const auto r = method == "quadrature" ? renorm_constants(e, Kappa2Method::quadrature, rtol)
                                              : kappa2_by_derivative_integration(e, rtol);
        t.add_row({e, r.kappa1, r.kappa2, std::string(to_string(r.method)), r.kappa2_error / r.kappa2});
    }
    run.tables.push_back(std::move(t));
    if (k1) {
        const auto pts = estimate_K1(k1_eps, opt);
        CsvTable s("k1.csv", "E[J^eps] - kappa1(eps) extrapolated to a = 0",
                   {{"eps", "time", "diagonal cutoff"},
                    {"estimate", "1", "Richardson limit of E[J^{eps,a}] - kappa1(eps) over a halving ladder"},
                    {"se", "1", "standard error of estimate"},
                    {"analytic", "1", "2 (2 pi)^{-3/2} (sqrt(eps) - 1)"}});
        for (const auto& p : pts) s.add_row({p.eps, p.estimate, p.se, p.analytic});
        run.tables.push_back(std::move(s));
    }
    if (var) {
        auto vopt = opt;
        vopt.richardson_levels = 1;
        const auto r = estimate_var_slope(var_eps, vopt);
        CsvTable s("var_slope.csv", "Var(J^{eps,a}) and its slope in log eps",
                   {{"eps", "time", "diagonal cutoff"},
                    {"variance", "1", "sample variance of J^{eps,a}"},
                    {"variance_se", "1", "delta-method standard error"},
                    {"slope", "1", "least-squares d Var / d log eps (repeated per row)"},
                    {"slope_se", "1", "standard error of slope"},
                    {"target_slope", "1", "-2 (2 pi)^{-2}"}});
        for (std::size_t i = 0; i < r.eps.size(); ++i)
            s.add_row({r.eps[i], r.variance[i], r.variance_se[i], r.slope, r.slope_se,
                       -2.0 / (4 * std::numbers::pi * std::numbers::pi)});
        run.tables.push_back(std::move(s));
    }
    return run;
}

RunArtifacts run_moments(const Config& c) {
    c.require_known({"eps", "a", "replicas", "n_steps", "seed", "rtol", "second_moment", "output_dir"});
    const auto eps = c.get_list("eps", {0.2, 0.1, 0.05});
    const auto as = c.get_list("a", {0.1, 0.05, 0.02});
    const std::size_t M = positive(c, "replicas", 2000);
    const double rtol = c.get_double("rtol", 1e-7);
    const bool second = c.get_bool("second_moment", true);
    const std::uint64_t seed = seed_or_random(c);
    for (double e : eps)
        if (!(e > 0)) throw ConfigError("moments: eps values must be > 0");
    for (double a : as)
        if (!(a > 0)) throw ConfigError("moments: a values must be > 0");
    const double eps_min = *std::min_element(eps.begin(), eps.end());
    const double a_min = *std::min_element(as.begin(), as.end());
    const auto n = c.get_int("n_steps", 0);
    if (n < 0) throw ConfigError("config: n_steps must be >= 0");
    const TimeGrid grid = n > 0 ? TimeGrid(static_cast<std::size_t>(n)) : TimeGrid::resolving(a_min, eps_min);
    check_resolution(grid, Regularization::fixed(eps_min, a_min));

    const std::size_t ne = eps.size(), na = as.size();
    std::vector<std::vector<double>> vals(ne * na, std::vector<double>(M));
    parallel_for(M, [&](std::size_t m) {
        const auto J = local_time_batch(sample_wiener(grid, seed, m), eps, as);
        for (std::size_t i = 0; i < ne; ++i)
            for (std::size_t k = 0; k < na; ++k) vals[i * na + k][m] = J[i][k];
    });
    RunArtifacts run;
    run.subcommand = "moments";
    run.seeds = {{"seed", seed}};
    CsvTable t("moments.csv", "Monte Carlo moments of J^{eps,a} against quadrature oracles",
               {{"eps", "time", "diagonal cutoff"},
                {"a", "time", "kernel variance"},
                {"replicas", "count", "Wiener paths"},
                {"n_steps", "count", "time grid steps"},
                {"mc_mean", "1", "sample mean of J^{eps,a}"},
                {"mc_se", "1", "standard error of mc_mean"},
                {"exact_mean", "1", "int_eps^1 (1-r) (2 pi (a+r))^{-3/2} dr"},
                {"exact_mean_grid", "1", "pair weights applied to p_{a+|tau-sigma|}(0)"},
                {"mc_second", "1", "sample mean of (J^{eps,a})^2"},
                {"mc_second_se", "1", "standard error of mc_second"},
                {"exact_second", "1", "sum over the three orderings of two time pairs of the Gaussian pair density"},
                {"exact_second_error", "1", "cubature error estimate"}});
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t k = 0; k < na; ++k) {
            const auto& v = vals[i * na + k];
            std::vector<double> sq(M);
            for (std::size_t m = 0; m < M; ++m) sq[m] = v[m] * v[m];
            const auto m1 = mean_se(v);
            const auto m2 = mean_se(sq);
            MomentValue ex2{std::nan(""), std::nan("")};
            if (second) ex2 = exact_second_moment_J(eps[i], as[k], rtol);
            t.add_row({eps[i], as[k], as_int(M), as_int(grid.n_steps()), m1.mean, m1.se, exact_mean_J(eps[i], as[k]),
                       exact_mean_J_discrete(grid, Regularization::fixed(eps[i], as[k])), m2.mean, m2.se, ex2.value,
                       ex2.error});
        }
    }
    run.tables.push_back(std::move(t));
    return run;
}

CsvTable summary_table(const std::string& file, const std::string& title) {
    return CsvTable(file, title,
                    {{"method", "-", "sampler"},
                     {"observable", "-", "|w_1|^2, exp(-|w_{1/2}|^2) or exp(-|w_{1/2}|^2 - |w_1|^2)"},
                     {"mean", "1", "estimate of the expectation under exp(-Jbar) dW / Z"},
                     {"se", "1", "standard error (batch means for chains)"},
                     {"diagnostic", "1", "effective sample size or acceptance rate"}});
}

RunArtifacts run_sample(const Config& c) {
    c.require_known({"lambda", "eps", "a", "level", "eps0", "n_steps", "replicas", "sampler", "beta_pcn", "steps",
                     "burn_in", "chains", "thin", "seed", "output_dir"});
    const double lambda = c.get_double("lambda", 1.0);
    if (!(lambda >= 0)) throw ConfigError("sample: lambda must be >= 0");
    const auto reg = regularization(c, 0.1, 0.05);
    const TimeGrid grid = grid_or_resolving(c, reg, 128);
    const std::string sampler = c.get_string("sampler", "both");
    if (sampler != "importance" && sampler != "pcn" && sampler != "both")
        throw ConfigError("sample: sampler must be importance, pcn or both");
    const std::size_t M = positive(c, "replicas", 5000);
    const double beta = c.get_double("beta_pcn", 0.2);
    if (!(beta > 0 && beta <= 1)) throw ConfigError("sample: beta_pcn must lie in (0, 1]");
    ChainOptions copt;
    copt.steps = positive(c, "steps", 20000);
    copt.burn_in = static_cast<std::size_t>(c.get_int("burn_in", 1000));
    copt.chains = positive(c, "chains", 4);
    copt.thin = positive(c, "thin", 1);
    const std::uint64_t seed = seed_or_random(c);
    const Observables obs;

    RunArtifacts run;
    run.subcommand = "sample";
    run.seeds = {{"seed", seed}, {"importance", mix_seed(seed, 1)}, {"pcn", mix_seed(seed, 2)}};
    auto t = summary_table("sample.csv", "Observables of nu_{eps,lambda}");
    if (sampler != "pcn") {
        const auto ens = importance_sample(grid, reg, lambda, M, mix_seed(seed, 1));
        for (std::size_t k = 0; k < obs.fns.size(); ++k) {
            const auto m = ens.mean(obs.fns[k]);
            t.add_row({std::string("importance"), obs.names[k], m.mean, m.se, ens.ess});
        }
        run.extra["importance"] = {{"ess", ens.ess}, {"low_ess", ens.low_ess},
                                   {"log_normalizer", ens.log_normalizer}};
    }
    if (sampler != "importance") {
        copt.seed = mix_seed(seed, 2);
        const auto r = run_pcn(grid, reg, lambda, beta, obs.fns, copt);
        for (std::size_t k = 0; k < obs.fns.size(); ++k) {
            const auto m = chain_mean(r.series[k], copt.chains);
            t.add_row({std::string("pcn"), obs.names[k], m.mean, m.se, r.acceptance_rate});
        }
    }
    run.tables.push_back(std::move(t));
    return run;
}

RunArtifacts run_quantize(const Config& c) {
    c.require_known({"lambda", "eps", "a", "level", "eps0", "n_steps", "tau_langevin", "adjusted", "coordinates",
                     "steps", "burn_in", "chains", "thin", "compare_pcn", "beta_pcn", "seed", "output_dir"});
    LangevinConfig lc;
    lc.lambda = c.get_double("lambda", 1.0);
    lc.reg = regularization(c, 0.2, 0.1);
    const TimeGrid grid = grid_or_resolving(c, lc.reg, 64);
    const std::string coords = c.get_string("coordinates", "whitened");
    if (coords != "whitened" && coords != "nodal") throw ConfigError("quantize: coordinates must be whitened or nodal");
    lc.coordinates = coords == "whitened" ? LangevinCoordinates::whitened : LangevinCoordinates::nodal;
    const double default_tau = coords == "whitened" ? grid.dt() : 0.25 * grid.dt();
    lc.tau = c.get_double("tau_langevin", default_tau);
    lc.adjusted = c.get_bool("adjusted", true);
    lc.validate(grid);
    ChainOptions copt;
    copt.steps = positive(c, "steps", 5000);
    copt.burn_in = static_cast<std::size_t>(c.get_int("burn_in", 500));
    copt.chains = positive(c, "chains", 1);
    copt.thin = positive(c, "thin", 10);
    const bool compare = c.get_bool("compare_pcn", true);
    const double beta = c.get_double("beta_pcn", 0.2);
    if (!(beta > 0 && beta <= 1)) throw ConfigError("quantize: beta_pcn must lie in (0, 1]");
    const std::uint64_t seed = seed_or_random(c);
    const Observables obs;

    RunArtifacts run;
    run.subcommand = "quantize";
    run.seeds = {{"seed", seed}, {"langevin", mix_seed(seed, 1)}, {"pcn", mix_seed(seed, 2)}};
    copt.seed = mix_seed(seed, 1);
    const auto tr = run_langevin(grid, lc, obs.fns, copt);
    CsvTable trace("trace.csv", "Langevin trace of the retained samples, chains concatenated",
                   {{"sample", "count", "retained sample index"},
                    {"end_to_end_sq", "1", "|w_1|^2"},
                    {"midpoint_gaussian", "1", "exp(-|w_{1/2}|^2)"},
                    {"cylinder", "1", "exp(-|w_{1/2}|^2 - |w_1|^2)"}});
    for (std::size_t s = 0; s < tr.series[0].size(); ++s)
        trace.add_row({as_int(s), tr.series[0][s], tr.series[1][s], tr.series[2][s]});
    auto t = summary_table("summary.csv", "Langevin averages with a pCN cross-check");
    const std::string name = lc.adjusted ? "mala" : "ula";
    for (std::size_t k = 0; k < obs.fns.size(); ++k) {
        const auto m = chain_mean(tr.series[k], copt.chains);
        t.add_row({name, obs.names[k], m.mean, m.se, tr.acceptance_rate});
    }
    if (compare) {
        copt.seed = mix_seed(seed, 2);
        const auto r = run_pcn(grid, lc.reg, lc.lambda, beta, obs.fns, copt);
        for (std::size_t k = 0; k < obs.fns.size(); ++k) {
            const auto m = chain_mean(r.series[k], copt.chains);
            t.add_row({std::string("pcn"), obs.names[k], m.mean, m.se, r.acceptance_rate});
        }
    }
    run.extra = {{"origin_pinned", tr.origin_pinned}, {"max_node_norm", tr.max_node_norm},
                 {"acceptance_rate", tr.acceptance_rate}};
    run.tables.push_back(std::move(trace));
    run.tables.push_back(std::move(t));
    return run;
}

RunArtifacts run_girsanov(const Config& c) {
    c.require_known({"lambda", "eps", "a", "level", "eps0", "n_steps", "direction_preset", "u", "replicas", "decay",
                     "u1", "u2", "levels_lo", "levels_hi", "p", "decay_replicas", "seed", "output_dir"});
    const double lambda = c.get_double("lambda", 0.5);
    if (!(lambda >= 0)) throw ConfigError("girsanov: lambda must be >= 0");
    const auto reg = regularization(c, 0.25, 0.125);
    const double eps0 = c.get_double("eps0", 1.0 / 22.0);
    const bool decay = c.get_bool("decay", true);
    const int lo = static_cast<int>(c.get_int("levels_lo", 1));
    const int hi = static_cast<int>(c.get_int("levels_hi", 4));
    const int p = static_cast<int>(c.get_int("p", 2));
    if (decay) {
        if (lo < 0 || hi <= lo) throw ConfigError("girsanov: need 0 <= levels_lo < levels_hi");
        if (p != 2 && p != 4) throw ConfigError("girsanov: p must be 2 or 4");
        Regularization::at_level(hi, eps0).validate();
    }
    // One grid serves both parts: it must resolve reg and the finest level.
    const auto n = c.get_int("n_steps", 0);
    if (n < 0) throw ConfigError("config: n_steps must be >= 0");
    std::size_t steps = n > 0 ? static_cast<std::size_t>(n) : TimeGrid::resolving(reg.a, reg.eps).n_steps();
    if (n == 0 && decay) {
        const auto fine = Regularization::at_level(hi, eps0);
        steps = std::max(steps, TimeGrid::resolving(fine.a, fine.eps).n_steps());
    }
    const TimeGrid grid(steps);
    check_resolution(grid, reg);
    DirectionPreset preset{};
    try {
        preset = parse_direction_preset(c.get_string("direction_preset", "sine"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("girsanov: ") + e.what());
    }
    const auto h = preset_direction(preset, grid);
    const auto us = c.get_list("u", {0.5, -0.5});
    const std::size_t M = positive(c, "replicas", 4000);
    const std::size_t Md = positive(c, "decay_replicas", 500);
    const double u1 = c.get_double("u1", 1.0), u2 = c.get_double("u2", -1.0);
    const std::uint64_t seed = seed_or_random(c);
    const Observables obs;

    RunArtifacts run;
    run.subcommand = "girsanov";
    run.seeds = {{"seed", seed}};
    CsvTable q("quasi_invariance.csv", "E[f(w + u h)] against E[f(w) a_uh(w)] under nu_{eps,lambda}",
               {{"observable", "-", "f"},
                {"u", "1", "shift size"},
                {"lhs", "1", "E[f(w + u h)]"},
                {"lhs_se", "1", "standard error of lhs"},
                {"rhs", "1", "E[f(w) exp(-lambda (J(w - u h) - J(w)) + V(u,h))]"},
                {"rhs_se", "1", "standard error of rhs"},
                {"combined_se", "1", "standard error of lhs - rhs on shared paths"},
                {"pass", "bool", "|lhs - rhs| <= 3 combined_se"}});
    std::uint64_t tag = 1;
    for (std::size_t k = 0; k < obs.fns.size(); ++k) {
        for (double u : us) {
            const auto r = quasi_invariance_check(obs.fns[k], u, h, lambda, reg, M, mix_seed(seed, tag++));
            q.add_row({obs.names[k], u, r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.combined_se,
                       std::string(r.pass ? "true" : "false")});
        }
    }
    run.tables.push_back(std::move(q));
    if (decay) {
        const auto rep = moment_decay_report(u1, u2, h, lambda, p, lo, hi, eps0, Md, mix_seed(seed, 100));
        CsvTable d("decay.csv", "E|Jhat_{m+1} - Jhat_m|^p along the schedule eps_m = 2^{-eps0 m}, a_m = 2^{-m}",
                   {{"level", "count", "m"},
                    {"moment", "1", "E_0 |Jhat_{m+1} - Jhat_m|^p, Jhat = J(w + u1 h) - J(w + u2 h)"},
                    {"moment_se", "1", "standard error of moment"},
                    {"weighted_moment", "1", "same under weights exp(-lambda J_{eps_m,a_m}) normalized"},
                    {"weighted_se", "1", "standard error of weighted_moment"}});
        for (const auto& row : rep.rows)
            d.add_row({std::int64_t{row.level}, row.moment, row.moment_se, row.weighted_moment, row.weighted_se});
        run.tables.push_back(std::move(d));
        run.extra = {{"decay_exponent", rep.decay_exponent}, {"weighted_decay_exponent", rep.weighted_decay_exponent}};
    }
    return run;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"renorm", "moments", "sample", "quantize", "girsanov", "verify"};
    return names;
}

int run(const std::string& subcommand, const std::optional<std::string>& config_path,
        const std::vector<std::string>& overrides, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    try {
        if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
            throw ConfigError("unknown subcommand '" + subcommand + "'");
        Config cfg = config_path ? Config::from_file(*config_path, subcommand) : Config{};
        for (const auto& o : overrides) cfg.apply_override(o);
        const std::string output_dir = cfg.get_string("output_dir", "results");

        RunArtifacts art;
        int code = exit_ok;
        if (subcommand == "verify") {
            const auto vc = VerifyConfig::from_config(cfg);
            out << "verify: seed " << vc.seed << ", replicas " << vc.replicas << std::endl;
            const auto report = run_verify(vc, {true, &out});
            art.subcommand = "verify";
            art.config = vc.to_json();
            art.seeds = {{"seed", vc.seed}};
            art.tables = report.tables;
            CsvTable s("acceptance.csv", "Acceptance criteria",
                       {{"criterion", "count", "number"},
                        {"name", "-", "short name"},
                        {"pass", "bool", "criterion met"},
                        {"detail", "-", "measured against target"}});
            nlohmann::json crit = nlohmann::json::array();
            for (const auto& c : report.criteria) {
                s.add_row({std::int64_t{c.id}, c.name, std::string(c.pass ? "true" : "false"), c.detail});
                crit.push_back({{"criterion", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            }
            art.tables.push_back(std::move(s));
            art.extra = {{"criteria", crit}, {"all_pass", report.all_pass()}};
            code = report.all_pass() ? exit_ok : exit_acceptance;
        } else {
            if (subcommand == "renorm") art = run_renorm(cfg);
            else if (subcommand == "moments") art = run_moments(cfg);
            else if (subcommand == "sample") art = run_sample(cfg);
            else if (subcommand == "quantize") art = run_quantize(cfg);
            else art = run_girsanov(cfg);
            art.config = config_echo(cfg);
        }
        const std::filesystem::path dir = std::filesystem::path(output_dir) / subcommand;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_artifacts(dir, art, wall);
        out << subcommand << ": wrote " << art.tables.size() << " CSV files and manifest.json to " << dir.string()
            << std::endl;
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << std::endl;
    } catch (const QuadratureError& e) {
        err << "error: " << e.what() << " (estimate " << e.estimate() << ", error " << e.error_estimate() << ")"
            << std::endl;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << std::endl;
    }
    return exit_validation;
}

}  // namespace polymer::cli
