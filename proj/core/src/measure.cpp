#include "polymer/measure.hpp"

#include <cmath>
#include <string>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"
#include "polymer/renorm.hpp"

namespace polymer {

double end_to_end_sq(const Path& path) { return norm2(path.end()); }

double midpoint_gaussian(const Path& path) { return std::exp(-norm2(path.at(0.5))); }

double cylinder_observable(const Path& path) {
    return std::exp(-norm2(path.at(0.5)) - norm2(path.end()));
}

MeanSe WeightedEnsemble::mean(std::span<const double> values) const {
    return weighted_mean_se(values, weights);
}

MeanSe WeightedEnsemble::mean(const Observable& f) const {
    std::vector<double> values(size());
    parallel_for(size(), [&](std::size_t i) { values[i] = f(path(i)); });
    return mean(values);
}

WeightedEnsemble make_ensemble(const TimeGrid& grid, std::uint64_t seed,
                               std::vector<double> log_weights) {
    const std::size_t M = log_weights.size();
    if (M < 2) throw InvalidArgument("ensemble needs at least 2 replicas");
    WeightedEnsemble ens;
    ens.grid = grid;
    ens.seed = seed;
    const double lse = log_sum_exp(log_weights);
    if (!std::isfinite(lse)) throw Error("ensemble log-weights are not finite");
    ens.weights.resize(M);
    std::vector<double> sq(M);
    for (std::size_t i = 0; i < M; ++i) {
        ens.weights[i] = std::exp(log_weights[i] - lse);
        sq[i] = ens.weights[i] * ens.weights[i];
    }
    ens.log_normalizer = lse - std::log(static_cast<double>(M));
    ens.normalizer_estimate = std::exp(ens.log_normalizer);
    ens.ess = 1.0 / canonical_sum(sq);
    ens.low_ess = ens.ess < 0.01 * static_cast<double>(M);
    ens.log_weights = std::move(log_weights);
    return ens;
}

WeightedEnsemble importance_sample(const TimeGrid& grid, const Regularization& reg, double lambda,
                                   std::size_t replicas, std::uint64_t seed) {
    if (!(lambda >= 0)) throw InvalidArgument("importance_sample: lambda must be >= 0");
    if (replicas < 2) throw InvalidArgument("importance_sample: need at least 2 replicas");
    reg.validate();
    if (!reg.unsafe_resolution) check_resolution(grid, reg);
    std::vector<double> lw(replicas, 0.0);
    if (lambda > 0) {
        const double k1 = reg.eps < 1.0 ? kappa1(reg.eps) : 0.0;
        const double k2 = reg.eps < 1.0 ? kappa2(reg.eps) : 0.0;
        const double shift = -lambda * k1 + lambda * lambda * k2;
        parallel_for(replicas, [&](std::size_t i) {
            const double J = local_time(sample_wiener(grid, seed, i), reg).value;
            lw[i] = -(lambda * J + shift);
        });
    }
    return make_ensemble(grid, seed, std::move(lw));
}

McmcChain McmcChain::start(Path initial, const Regularization& reg, double lambda, double beta) {
    if (!(beta > 0 && beta <= 1)) throw InvalidArgument("pCN: beta must lie in (0, 1]");
    if (!(lambda >= 0)) throw InvalidArgument("pCN: lambda must be >= 0");
    const double J = local_time(initial, reg).value;
    return McmcChain{std::move(initial), J, reg, lambda, beta, 0, 0};
}

double McmcChain::acceptance_rate() const {
    return step_count == 0 ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(step_count);
}

Path pcn_proposal(const Path& current, const Path& xi, double beta) {
    if (!(current.grid() == xi.grid())) throw InvalidArgument("pcn_proposal: grids differ");
    const double rho = std::sqrt(1.0 - beta * beta);
    std::vector<Vec3> pos(current.positions().size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = rho * current[i] + beta * xi[i];
    return Path(current.grid(), std::move(pos));
}

double pcn_log_acceptance(double J_current, double J_proposal, double lambda) {
    return std::min(0.0, lambda * (J_current - J_proposal));
}

bool pcn_step(McmcChain& chain, RngStream& rng) {
    Path proposal = pcn_proposal(chain.current, sample_wiener(chain.current.grid(), rng), chain.beta);
    const double J_new = chain.lambda == 0.0 ? 0.0 : local_time(proposal, chain.reg).value;
    const double log_u = std::log(rng.uniform());
    ++chain.step_count;
    const bool accept = chain.lambda == 0.0 || log_u < pcn_log_acceptance(chain.current_J, J_new, chain.lambda);
    if (accept) {
        chain.current = std::move(proposal);
        chain.current_J = J_new;
        ++chain.accept_count;
    }
    return accept;
}

ChainRun run_pcn(const TimeGrid& grid, const Regularization& reg, double lambda, double beta,
                 std::span<const Observable> observables, const ChainOptions& opt) {
    if (opt.chains == 0 || opt.thin == 0) throw InvalidArgument("run_pcn: chains and thin must be >= 1");
    if (!reg.unsafe_resolution) check_resolution(grid, reg);
    const std::size_t per_chain = opt.steps / opt.thin;
    const std::size_t K = observables.size();
    std::vector<std::vector<std::vector<double>>> parts(opt.chains);
    std::vector<std::size_t> accepted(opt.chains);
    parallel_for(opt.chains, [&](std::size_t c) {
        RngStream rng(opt.seed, c);
        McmcChain chain = McmcChain::start(sample_wiener(grid, rng), reg, lambda, beta);
        if (lambda == 0.0) chain.current_J = 0.0;
        auto& out = parts[c];
        out.assign(K, std::vector<double>());
        for (auto& v : out) v.reserve(per_chain);
        for (std::size_t s = 0; s < opt.burn_in; ++s) pcn_step(chain, rng);
        std::size_t acc0 = chain.accept_count;
        for (std::size_t s = 1; s <= per_chain * opt.thin; ++s) {
            pcn_step(chain, rng);
            if (s % opt.thin == 0) {
                for (std::size_t k = 0; k < K; ++k) out[k].push_back(observables[k](chain.current));
            }
        }
        accepted[c] = chain.accept_count - acc0;
    });
    ChainRun run;
    run.series.assign(K, {});
    std::size_t acc = 0;
    for (std::size_t c = 0; c < opt.chains; ++c) {
        for (std::size_t k = 0; k < K; ++k) {
            run.series[k].insert(run.series[k].end(), parts[c][k].begin(), parts[c][k].end());
        }
        acc += accepted[c];
    }
    run.steps = opt.chains * per_chain * opt.thin;
    run.acceptance_rate = run.steps ? static_cast<double>(acc) / static_cast<double>(run.steps) : 0.0;
    return run;
}

MeanSe chain_mean(std::span<const double> series, std::size_t chains) {
    if (chains == 0 || series.size() % chains != 0) {
        throw InvalidArgument("chain_mean: series length must be a multiple of the chain count");
    }
    const std::size_t len = series.size() / chains;
    double sum = 0.0, var = 0.0;
    for (std::size_t c = 0; c < chains; ++c) {
        const auto ms = batch_means(series.subspan(c * len, len), 20);
        sum += ms.mean;
        var += ms.se * ms.se;
    }
    const double C = static_cast<double>(chains);
    return MeanSe{sum / C, std::sqrt(var) / C, series.size()};
}

TruncatedEnergy truncated_energy(const Path& path, int level, double lambda, double delta1,
                                 double eps0) {
    if (!(delta1 > 0 && delta1 < 1.0 / 200.0)) {
        throw InvalidArgument("truncated_energy: delta1 must lie in (0, 1/200)");
    }
    if (!(lambda >= 0)) throw InvalidArgument("truncated_energy: lambda must be >= 0");
    const auto reg = Regularization::at_level(level, eps0);
    const auto ext = local_time_extrapolated(path, reg);
    TruncatedEnergy out;
    out.J = ext.j_a;
    out.J_limit = ext.value;
    out.gap = ext.gap;
    out.indicator = ext.gap <= std::exp2(-delta1 * level);
    if (out.indicator && lambda > 0) {
        const double k1 = reg.eps < 1.0 ? kappa1(reg.eps) : 0.0;
        const double k2 = reg.eps < 1.0 ? kappa2(reg.eps) : 0.0;
        out.value = lambda * out.J - lambda * k1 + lambda * lambda * k2;
    }
    return out;
}

MuEnsemble mu_n_ensemble(int level, double lambda, double delta1, double eps0,
                         std::size_t replicas, std::uint64_t seed, std::size_t n_steps) {
    const auto reg = Regularization::at_level(level, eps0);
    const TimeGrid grid = n_steps > 0 ? TimeGrid(n_steps) : TimeGrid::resolving(0.5 * reg.a, reg.eps);
    std::vector<double> lw(replicas);
    std::vector<double> off(replicas);
    parallel_for(replicas, [&](std::size_t i) {
        const auto te = truncated_energy(sample_wiener(grid, seed, i), level, lambda, delta1, eps0);
        lw[i] = -te.value;
        off[i] = te.indicator ? 0.0 : 1.0;
    });
    MuEnsemble out;
    out.truncated_fraction = pairwise_sum(off) / static_cast<double>(replicas);
    out.ensemble = make_ensemble(grid, seed, std::move(lw));
    return out;
}

ScheduleReport schedule_convergence_report(double lambda, std::span<const Observable> observables,
                                           int n_lo, int n_hi, double eps0, std::size_t replicas,
                                           std::uint64_t seed) {
    if (n_hi - n_lo < 2) throw InvalidArgument("schedule_convergence_report: need at least 3 levels");
    if (n_lo < 0) throw InvalidArgument("schedule_convergence_report: levels must be >= 0");
    const std::size_t L = static_cast<std::size_t>(n_hi - n_lo + 1);
    std::vector<Regularization> regs;
    for (int n = n_lo; n <= n_hi; ++n) regs.push_back(Regularization::at_level(n, eps0));
    const TimeGrid grid = TimeGrid::resolving(regs.back().a, regs.back().eps);
    std::vector<double> shift(L, 0.0);
    if (lambda > 0) {
        for (std::size_t l = 0; l < L; ++l) {
            const double e = regs[l].eps;
            if (e < 1.0) shift[l] = -lambda * kappa1(e) + lambda * lambda * kappa2(e);
        }
    }
    const std::size_t K = observables.size();
    std::vector<std::vector<double>> lw(L, std::vector<double>(replicas, 0.0));
    std::vector<std::vector<double>> obs(K, std::vector<double>(replicas));
    parallel_for(replicas, [&](std::size_t i) {
        const Path path = sample_wiener(grid, seed, i);
        for (std::size_t k = 0; k < K; ++k) obs[k][i] = observables[k](path);
        if (lambda > 0) {
            for (std::size_t l = 0; l < L; ++l) {
                lw[l][i] = -(lambda * local_time(path, regs[l]).value + shift[l]);
            }
        }
    });
    ScheduleReport rep;
    for (std::size_t l = 0; l < L; ++l) {
        const auto ens = make_ensemble(grid, seed, lw[l]);
        LevelSummary s;
        s.level = n_lo + static_cast<int>(l);
        s.eps = regs[l].eps;
        s.a = regs[l].a;
        for (std::size_t k = 0; k < K; ++k) s.means.push_back(ens.mean(obs[k]));
        s.normalizer = ens.normalizer_estimate;
        s.log_normalizer = ens.log_normalizer;
        s.ess = ens.ess;
        rep.levels.push_back(std::move(s));
    }
    rep.differences.assign(K, {});
    for (std::size_t l = 0; l + 1 < L; ++l) {
        for (std::size_t k = 0; k < K; ++k) {
            rep.differences[k].push_back(std::abs(rep.levels[l + 1].means[k].mean - rep.levels[l].means[k].mean));
        }
        rep.normalizer_differences.push_back(std::abs(rep.levels[l + 1].normalizer - rep.levels[l].normalizer));
    }
    return rep;
}

}  // namespace polymer
