#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace polymer {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

MeanSe mean_se(std::span<const double> values);

// Self-normalized importance-sampling mean; `weights` must sum to one.
MeanSe weighted_mean_se(std::span<const double> values, std::span<const double> weights);

// Batch-means estimate for a correlated series (MCMC output).
MeanSe batch_means(std::span<const double> series, std::size_t n_batches = 50);

inline double combined_se(double se1, double se2) { return std::sqrt(se1 * se1 + se2 * se2); }

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
};

// Least squares y = intercept + slope * x. With `sigma` given, points are
// weighted by 1/sigma^2 and the reported standard errors come from the
// propagated sigmas; otherwise from the residual scatter.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma = {});

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
// distribution for the p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

double log_sum_exp(std::span<const double> values);

}  // namespace polymer
