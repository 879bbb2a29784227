#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/paths.hpp"

namespace polymer {

// V(u,h) = u h'(1).w_1 - u int w.h'' dt - u^2/2 int |h'|^2 dt (trapezoidal).
double cameron_martin_V(const Path& path, double u, const Direction& h);

// f(w - u h) - f(w). Both densities below pull back along -u h through this
// one helper.
double pullback_difference(const Path& path, double u, const Direction& h,
                           const std::function<double(const Path&)>& f);

struct DensityEstimate {
    double value = 1.0;      // exp(-lambda rho_part + v_part)
    double log_value = 0.0;
    double rho_part = 0.0;   // J(w - u h) - J(w), the level-n stand-in for rho(-u, h)
    double v_part = 0.0;
    std::optional<int> level;
};

// Density of the shifted measure, a_{uh} = exp(-lambda rho(-u,h) + V(u,h)).
DensityEstimate a_uh_estimate(const Path& path, double u, const Direction& h, double lambda,
                              const Regularization& reg);
DensityEstimate a_uh_estimate(const Path& path, double u, const Direction& h, double lambda,
                              int level, double eps0);

struct QuasiInvarianceReport {
    double lhs = 0.0;  // E[f(w + u h)]
    double rhs = 0.0;  // E[f(w) a_uh(w)]
    double lhs_se = 0.0;
    double rhs_se = 0.0;
    double combined_se = 0.0;  // of lhs - rhs on the shared ensemble
    bool pass = false;         // |lhs - rhs| <= 3 combined_se
};

// Both sides on one importance ensemble of nu_{eps,lambda}, drawn on h.grid.
QuasiInvarianceReport quasi_invariance_check(const Observable& f, double u, const Direction& h,
                                             double lambda, const Regularization& reg,
                                             std::size_t replicas, std::uint64_t seed);

struct DnValue {
    double value = 1.0;
    double energy_difference = 0.0;  // J'(w - u h) - J'(w)
    double v_part = 0.0;
    bool indicator_shifted = false;
    bool indicator_base = false;
};

// exp(-(J'_{n,lambda}(w - u h) - J'_{n,lambda}(w))) exp(V(u,h))
DnValue D_n_lambda(const Path& path, double u, const Direction& h, int level, double lambda,
                   double delta1, double eps0);

struct DecayRow {
    int level = 0;              // m; the row compares levels m and m+1
    double moment = 0.0;        // E_0 |J^_{m+1} - J^_m|^p
    double moment_se = 0.0;
    double weighted_moment = 0.0;  // same under the level-m importance ensemble
    double weighted_se = 0.0;
};

struct DecayReport {
    std::vector<DecayRow> rows;
    std::vector<double> ratios;           // moment_m / moment_{m+1}
    std::vector<double> weighted_ratios;
    double decay_exponent = 0.0;          // slope of -log2(moment) against m
    double weighted_decay_exponent = 0.0;
};

// Paths are drawn on h.grid, which must resolve level n_hi.
DecayReport moment_decay_report(double u1, double u2, const Direction& h, double lambda, int p,
                                int n_lo, int n_hi, double eps0, std::size_t replicas,
                                std::uint64_t seed);

// Grid resolving level n of the schedule (including the a_n/2 extrapolation
// width), refined to at least min_steps.
TimeGrid level_grid(int level, double eps0, std::size_t min_steps = 1);

}  // namespace polymer
