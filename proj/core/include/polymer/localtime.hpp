#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "polymer/paths.hpp"
#include "polymer/vec3.hpp"

namespace polymer {

// Diagonal cutoff eps and kernel width a, optionally tied to the dyadic
// schedule eps_n = 2^(-eps0 n), a_n = 2^(-n).
struct Regularization {
    double eps = 0.1;
    double a = 0.05;
    std::optional<int> level;
    double eps0 = 1.0 / 22.0;
    // Skip the grid resolution check (scaling studies only).
    bool unsafe_resolution = false;

    static Regularization fixed(double eps, double a);
    static Regularization at_level(int n, double eps0);
    Regularization with_a(double new_a) const;
    void validate() const;
};

// Integration window: sigma in [s, t], tau in [u, v], tau >= sigma + eps.
struct TimeWindow {
    double s = 0.0;
    double t = 1.0;
    double u = 0.0;
    double v = 1.0;

    static TimeWindow full() { return {}; }
    void validate() const;
    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct LocalTimeValue {
    double value = 0.0;
    Regularization reg;
    TimeWindow window;
    std::size_t grid_steps = 0;
};

// (2 pi t)^(-3/2) exp(-|x|^2 / 2t)
double heat_kernel(double t, const Vec3& x);
double heat_kernel_at_zero(double t);

// Throws ResolutionError unless dt <= a/4 and dt <= eps/8.
void check_resolution(const TimeGrid& grid, const Regularization& reg);

// Node-pair weights for the double integral over a window with the eps
// strip removed. Each grid square is split along its diagonal parallel to
// tau = sigma and the integrand is replaced by its linear interpolant on each
// triangle; triangles cut by tau - sigma = eps are clipped exactly, so a
// constant integrand is integrated without error.
class PairQuadrature {
public:
    PairQuadrature(const TimeGrid& grid, double eps, const TimeWindow& window);

    const TimeGrid& grid() const noexcept { return grid_; }
    double eps() const noexcept { return eps_; }
    const TimeWindow& window() const noexcept { return window_; }

    struct Row {
        std::size_t i;        // sigma node
        std::size_t j_begin;  // first tau node
        std::size_t offset;   // into weights()
        std::size_t count;
    };
    std::span<const Row> rows() const noexcept { return rows_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double total_weight() const;
    // Weight of the pair (i, j), zero outside the support.
    double weight(std::size_t i, std::size_t j) const;

    // Shared instance for (grid, eps, window); built on first use.
    static std::shared_ptr<const PairQuadrature> get(const TimeGrid& grid, double eps,
                                                     const TimeWindow& window);

private:
    TimeGrid grid_;
    double eps_;
    TimeWindow window_;
    std::vector<Row> rows_;
    std::vector<double> weights_;
    std::vector<std::size_t> row_of_node_;  // index into rows_, or npos
};

LocalTimeValue local_time(const Path& path, const Regularization& reg,
                          const TimeWindow& window = TimeWindow::full());

// J(path + u h) - J(path) in one pass over the pairs.
double j_tilde(const Path& path, double u, const Direction& h, const Regularization& reg,
               const TimeWindow& window = TimeWindow::full());

// j_tilde(u1) - j_tilde(u2)
double j_hat(const Path& path, double u1, double u2, const Direction& h,
             const Regularization& reg, const TimeWindow& window = TimeWindow::full());

// dJ/d(node position) of the discretized local time, one vector per node.
struct LocalTimeGradient {
    double value = 0.0;
    std::vector<Vec3> gradient;
};
LocalTimeGradient local_time_with_gradient(const Path& path, const Regularization& reg,
                                           const TimeWindow& window = TimeWindow::full());
std::vector<Vec3> local_time_gradient(const Path& path, const Regularization& reg,
                                      const TimeWindow& window = TimeWindow::full());

// Local time of the bridge-transformed path.
double pinned_local_time(const Path& path, const Regularization& reg, std::span<const Pin> pins,
                         const TimeWindow& window = TimeWindow::full());

// a -> 0 limit from J at a and a/2, assuming the error behaves like
// C a^rate. With rate = 1: J0 = 2 J(a/2) - J(a).
struct Extrapolated {
    double value = 0.0;
    double j_a = 0.0;
    double j_half = 0.0;
    // |value - J(a)|: estimated distance of J(a) from the limit.
    double gap = 0.0;
};
double richardson(double j_a, double j_half, double rate = 1.0);
// Repeated elimination from J(a), J(a/2), J(a/4), ...: removes the error
// terms a^rate, a^(2 rate), ... in turn.
double richardson(std::span<const double> by_halving, double rate = 1.0);
Extrapolated local_time_extrapolated(const Path& path, const Regularization& reg,
                                     const TimeWindow& window = TimeWindow::full(),
                                     double rate = 1.0);

// J for every (eps, a) combination from one pass over the node pairs.
// Result is indexed [eps index][a index].
std::vector<std::vector<double>> local_time_batch(const Path& path, std::span<const double> eps,
                                                  std::span<const double> a,
                                                  const TimeWindow& window = TimeWindow::full(),
                                                  bool unsafe_resolution = false);

}  // namespace polymer
