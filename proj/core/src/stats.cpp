#include "polymer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"

namespace polymer {

MeanSe mean_se(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(values) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

MeanSe weighted_mean_se(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) {
        throw InvalidArgument("weighted_mean_se: values and weights differ in length");
    }
    const std::size_t n = values.size();
    if (n == 0) return {};
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) terms[i] = weights[i] * values[i];
    const double mean = canonical_sum(terms);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = weights[i] * (values[i] - mean);
        terms[i] = d * d;
    }
    return {mean, std::sqrt(canonical_sum(terms)), n};
}

MeanSe batch_means(std::span<const double> series, std::size_t n_batches) {
    const std::size_t n = series.size();
    if (n_batches < 2 || n < 2 * n_batches) return mean_se(series);
    const std::size_t len = n / n_batches;
    std::vector<double> means(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        means[b] = pairwise_sum(series.subspan(b * len, len)) / static_cast<double>(len);
    }
    MeanSe out = mean_se(means);
    out.n = len * n_batches;
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma) {
    const std::size_t n = x.size();
    if (n != y.size() || (!sigma.empty() && sigma.size() != n)) {
        throw InvalidArgument("linear_fit: input lengths differ");
    }
    if (n < 2) throw InvalidArgument("linear_fit: need at least two points");
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
        sxx += w * (x[i] - xm) * (x[i] - xm);
        sxy += w * (x[i] - xm) * (y[i] - ym);
    }
    if (sxx <= 0) throw InvalidArgument("linear_fit: abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double scale = 1.0;
    if (sigma.empty()) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        scale = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
    }
    fit.slope_se = std::sqrt(scale / sxx);
    fit.intercept_se = std::sqrt(scale * (1.0 / sw + xm * xm / sxx));
    return fit;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= v) ++i;
        while (j < sb.size() && sb[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::abs(term) < 1e-12) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {d, p};
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    std::vector<double> e(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) e[i] = std::exp(values[i] - m);
    return m + std::log(canonical_sum(e));
}

}  // namespace polymer
