#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "polymer/localtime.hpp"
#include "polymer/paths.hpp"
#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

namespace polymer {

using Observable = std::function<double(const Path&)>;

// |w_1|^2
double end_to_end_sq(const Path& path);
// exp(-|w_{1/2}|^2)
double midpoint_gaussian(const Path& path);
// exp(-|w_{1/2}|^2 - |w_1|^2)
double cylinder_observable(const Path& path);

// Wiener ensemble with importance weights. Replica i is the path drawn from
// stream (seed, i) on `grid`; paths are regenerated on demand instead of
// being stored.
struct WeightedEnsemble {
    TimeGrid grid{1};
    std::uint64_t seed = 0;
    std::vector<double> log_weights;
    std::vector<double> weights;  // normalized
    // Mean of exp(log_weights), with its logarithm for when it overflows.
    double normalizer_estimate = 1.0;
    double log_normalizer = 0.0;
    double ess = 0.0;
    bool low_ess = false;  // ess < 0.01 M

    std::size_t size() const noexcept { return log_weights.size(); }
    Path path(std::size_t i) const { return sample_wiener(grid, seed, i); }
    MeanSe mean(const Observable& f) const;
    MeanSe mean(std::span<const double> values) const;
};

WeightedEnsemble make_ensemble(const TimeGrid& grid, std::uint64_t seed,
                               std::vector<double> log_weights);

// Weights exp(-Jbar) for nu_{eps,lambda}; lambda = 0 gives uniform weights.
WeightedEnsemble importance_sample(const TimeGrid& grid, const Regularization& reg, double lambda,
                                   std::size_t replicas, std::uint64_t seed);

struct McmcChain {
    Path current;
    double current_J = 0.0;
    Regularization reg;
    double lambda = 0.0;
    double beta = 0.2;
    std::size_t step_count = 0;
    std::size_t accept_count = 0;

    static McmcChain start(Path initial, const Regularization& reg, double lambda, double beta);
    double acceptance_rate() const;
};

// sqrt(1 - beta^2) w + beta xi
Path pcn_proposal(const Path& current, const Path& xi, double beta);
// log of the Metropolis acceptance probability min(1, exp(lambda (J - J'))).
double pcn_log_acceptance(double J_current, double J_proposal, double lambda);
// One preconditioned Crank-Nicolson step; returns true on acceptance.
bool pcn_step(McmcChain& chain, RngStream& rng);

struct ChainRun {
    // series[k][s]: observable k at retained sample s.
    std::vector<std::vector<double>> series;
    double acceptance_rate = 0.0;
    std::size_t steps = 0;
};

struct ChainOptions {
    std::size_t steps = 10000;
    std::size_t burn_in = 1000;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::size_t chains = 1;  // independent chains, concatenated in order
};

ChainRun run_pcn(const TimeGrid& grid, const Regularization& reg, double lambda, double beta,
                 std::span<const Observable> observables, const ChainOptions& opt);

// Per-chain batch means combined over chains of equal length.
MeanSe chain_mean(std::span<const double> series, std::size_t chains);

struct TruncatedEnergy {
    double value = 0.0;   // lambda J - lambda kappa1 + lambda^2 kappa2, times the indicator
    bool indicator = false;
    double J = 0.0;       // at (eps_n, a_n)
    double J_limit = 0.0; // a -> 0 extrapolation
    double gap = 0.0;
};

// Energy at schedule level n, kept only where the a -> 0 extrapolation gap
// is at most 2^(-delta1 n).
TruncatedEnergy truncated_energy(const Path& path, int level, double lambda, double delta1,
                                 double eps0);

struct MuEnsemble {
    WeightedEnsemble ensemble;
    double truncated_fraction = 0.0;  // share of replicas with indicator off
};

MuEnsemble mu_n_ensemble(int level, double lambda, double delta1, double eps0,
                         std::size_t replicas, std::uint64_t seed, std::size_t n_steps = 0);

struct LevelSummary {
    int level = 0;
    double eps = 0.0;
    double a = 0.0;
    std::vector<MeanSe> means;  // per observable
    double normalizer = 0.0;
    double log_normalizer = 0.0;
    double ess = 0.0;
};

struct ScheduleReport {
    std::vector<LevelSummary> levels;
    // differences[k][m] = |mean_{m+1} - mean_m| for observable k.
    std::vector<std::vector<double>> differences;
    std::vector<double> normalizer_differences;
};

// nu_{eps_n, lambda} for n = n_lo..n_hi, all levels evaluated on the same
// paths (drawn on the grid resolving the finest level).
ScheduleReport schedule_convergence_report(double lambda, std::span<const Observable> observables,
                                           int n_lo, int n_hi, double eps0, std::size_t replicas,
                                           std::uint64_t seed);

}  // namespace polymer
