#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/paths.hpp"
#include "polymer/rng.hpp"

namespace polymer {

// Coordinates the Langevin update acts on. `whitened` uses the scaled
// increments z_i = (w_{i+1} - w_i) / sqrt(dt), in which the Wiener part of
// the potential is |z|^2 / 2; `nodal` moves node positions directly.
enum class LangevinCoordinates { whitened, nodal };

struct LangevinConfig {
    Regularization reg;
    double lambda = 0.0;
    double tau = 0.0;
    bool adjusted = true;  // MALA; false gives the unadjusted Euler scheme
    LangevinCoordinates coordinates = LangevinCoordinates::whitened;

    // tau <= dt in whitened coordinates, tau <= dt/4 in nodal ones (the
    // stiffest nodal mode has curvature 4/dt).
    void validate(const TimeGrid& grid) const;
};

// U = sum |w_{i+1} - w_i|^2 / (2 dt) + lambda J
double target_potential(const Path& path, const Regularization& reg, double lambda);
// dU/d(node); node 0 is pinned and gets zero.
std::vector<Vec3> target_potential_gradient(const Path& path, const Regularization& reg,
                                            double lambda);

struct LangevinState {
    Path path;
    double potential = 0.0;
    std::vector<Vec3> gradient;  // in the configured coordinates
    std::size_t steps = 0;
    std::size_t accepted = 0;

    static LangevinState start(Path path, const LangevinConfig& config);
    double acceptance_rate() const;
};

// One step w' = w - tau grad U + sqrt(2 tau) xi, Metropolis-corrected when
// config.adjusted. Returns true if the move was taken.
bool langevin_step(LangevinState& state, const LangevinConfig& config, RngStream& rng);

struct QuantizationTrace {
    std::vector<std::vector<double>> series;  // per observable
    double acceptance_rate = 1.0;
    double max_node_norm = 0.0;
    bool origin_pinned = true;
    Path final_path{TimeGrid(1), std::vector<Vec3>(2)};
};

QuantizationTrace run_langevin(const TimeGrid& grid, const LangevinConfig& config,
                               std::span<const Observable> observables, const ChainOptions& opt);

struct DriftEstimate {
    double value = 0.0;  // extrapolated to s -> 0
    double se = 0.0;
    double at_s = 0.0;
    double se_s = 0.0;
    double at_half = 0.0;
    double se_half = 0.0;
    int level = 0;
    bool exploratory = true;
};

// Weighted mean of J~(s, k) / s at level n for s and s/2, extrapolated
// linearly to s = 0. Whether the limit exists is not known; the result is
// marked exploratory.
DriftEstimate drift_directional_estimate(const WeightedEnsemble& ensemble, const Direction& k,
                                         double s_small, int level, double eps0);

}  // namespace polymer
