#include "polymer/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"

namespace polymer {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

double kernel_prefactor(double a) { return std::pow(2.0 * std::numbers::pi * a, -1.5); }

}  // namespace

Regularization Regularization::fixed(double eps, double a) {
    Regularization r;
    r.eps = eps;
    r.a = a;
    r.validate();
    return r;
}

Regularization Regularization::at_level(int n, double eps0) {
    if (n < 0) throw InvalidArgument("Regularization: level must be non-negative");
    Regularization r;
    r.level = n;
    r.eps0 = eps0;
    r.eps = std::exp2(-eps0 * n);
    r.a = std::exp2(-static_cast<double>(n));
    r.validate();
    return r;
}

Regularization Regularization::with_a(double new_a) const {
    Regularization r = *this;
    r.a = new_a;
    r.level.reset();
    r.validate();
    return r;
}

void Regularization::validate() const {
    if (!(eps > 0) || !std::isfinite(eps)) throw InvalidArgument("Regularization: eps must be > 0");
    if (!(a > 0) || !std::isfinite(a)) throw InvalidArgument("Regularization: a must be > 0");
    if (level) {
        if (!(eps0 > 0 && eps0 < 1.0 / 21.0)) {
            throw InvalidArgument("Regularization: eps0 must lie in (0, 1/21)");
        }
        const double e = std::exp2(-eps0 * *level);
        const double an = std::exp2(-static_cast<double>(*level));
        if (std::abs(eps - e) > 1e-14 * e || std::abs(a - an) > 1e-14 * an) {
            throw InvalidArgument("Regularization: eps, a inconsistent with level");
        }
    }
}

void TimeWindow::validate() const {
    if (!(0.0 <= s && s <= t && t <= 1.0) || !(0.0 <= u && u <= v && v <= 1.0)) {
        throw InvalidArgument("TimeWindow: need 0 <= s <= t <= 1 and 0 <= u <= v <= 1");
    }
}

double heat_kernel(double t, const Vec3& x) {
    if (!(t > 0)) throw InvalidArgument("heat_kernel: t must be > 0");
    return kernel_prefactor(t) * std::exp(-norm2(x) / (2.0 * t));
}

double heat_kernel_at_zero(double t) {
    if (!(t > 0)) throw InvalidArgument("heat_kernel: t must be > 0");
    return kernel_prefactor(t);
}

void check_resolution(const TimeGrid& grid, const Regularization& reg) {
    const double dt = grid.dt();
    if (4.0 * dt > reg.a * (1.0 + 1e-12)) {
        throw ResolutionError("a", "grid too coarse for kernel width a=" + std::to_string(reg.a) +
                                       ": need dt <= a/4, have dt=" + std::to_string(dt));
    }
    if (reg.eps < 1.0 && 8.0 * dt > reg.eps * (1.0 + 1e-12)) {
        throw ResolutionError("eps", "grid too coarse for cutoff eps=" + std::to_string(reg.eps) +
                                         ": need dt <= eps/8, have dt=" + std::to_string(dt));
    }
}

PairQuadrature::PairQuadrature(const TimeGrid& grid, double eps, const TimeWindow& window)
    : grid_(grid), eps_(eps), window_(window) {
    if (!(eps > 0)) throw InvalidArgument("PairQuadrature: eps must be > 0");
    window.validate();
    const std::size_t is = grid.index_of(window.s);
    const std::size_t it = grid.index_of(window.t);
    const std::size_t iu = grid.index_of(window.u);
    const std::size_t iv = grid.index_of(window.v);
    const double e = eps / grid.dt();
    row_of_node_.assign(grid.nodes(), npos);
    if (e >= static_cast<double>(grid.n_steps())) return;
    const auto kmin = static_cast<std::size_t>(std::floor(e));

    std::size_t total = 0;
    for (std::size_t i = is; i <= it; ++i) {
        const std::size_t jb = std::max(iu, i + kmin);
        if (jb > iv) continue;
        row_of_node_[i] = rows_.size();
        rows_.push_back(Row{i, jb, total, iv - jb + 1});
        total += iv - jb + 1;
    }
    weights_.assign(total, 0.0);

    const double dt2 = grid.dt() * grid.dt();
    auto add = [&](std::size_t i, std::size_t j, double w) {
        const std::size_t r = row_of_node_[i];
        const Row& row = rows_[r];
        weights_[row.offset + (j - row.j_begin)] += w * dt2;
    };
    for (std::size_t i = is; i < it; ++i) {
        const std::size_t j_start = std::max(iu, i + kmin - std::min(kmin, std::size_t{1}));
        for (std::size_t j = j_start; j < iv; ++j) {
            const double d0 = static_cast<double>(j) - static_cast<double>(i);
            if (d0 + 1.0 <= e) continue;
            // Upper triangle: (i,j), (i+1,j+1) on level d0; (i,j+1) on d0+1.
            if (d0 >= e) {
                add(i, j, 1.0 / 6.0);
                add(i + 1, j + 1, 1.0 / 6.0);
                add(i, j + 1, 1.0 / 6.0);
            } else {
                const double g = 1.0 - (e - d0);
                add(i, j + 1, 0.5 * g * g * (1.0 - 2.0 * g / 3.0));
                add(i, j, g * g * g / 6.0);
                add(i + 1, j + 1, g * g * g / 6.0);
            }
            // Lower triangle: (i+1,j) on level d0-1; (i,j), (i+1,j+1) on d0.
            const double b = d0 - 1.0;
            if (b >= e) {
                add(i + 1, j, 1.0 / 6.0);
                add(i, j, 1.0 / 6.0);
                add(i + 1, j + 1, 1.0 / 6.0);
            } else if (b + 1.0 > e) {
                const double f = e - b;
                add(i + 1, j, 1.0 / 6.0 - 0.5 * f * f * (1.0 - 2.0 * f / 3.0));
                add(i, j, 1.0 / 6.0 - f * f * f / 6.0);
                add(i + 1, j + 1, 1.0 / 6.0 - f * f * f / 6.0);
            }
        }
    }
}

double PairQuadrature::total_weight() const { return pairwise_sum(weights_); }

double PairQuadrature::weight(std::size_t i, std::size_t j) const {
    if (i >= row_of_node_.size() || row_of_node_[i] == npos) return 0.0;
    const Row& row = rows_[row_of_node_[i]];
    if (j < row.j_begin || j >= row.j_begin + row.count) return 0.0;
    return weights_[row.offset + (j - row.j_begin)];
}

std::shared_ptr<const PairQuadrature> PairQuadrature::get(const TimeGrid& grid, double eps,
                                                          const TimeWindow& window) {
    struct Entry {
        std::size_t n;
        double eps;
        TimeWindow window;
        std::shared_ptr<const PairQuadrature> quad;
    };
    static std::mutex mutex;
    static std::deque<Entry> cache;
    {
        std::lock_guard lock(mutex);
        for (const auto& en : cache) {
            if (en.n == grid.n_steps() && en.eps == eps && en.window == window) return en.quad;
        }
    }
    auto quad = std::make_shared<const PairQuadrature>(grid, eps, window);
    std::lock_guard lock(mutex);
    cache.push_back(Entry{grid.n_steps(), eps, window, quad});
    if (cache.size() > 64) cache.pop_front();
    return quad;
}

namespace {

void prepare(const Path& path, const Regularization& reg, const TimeWindow& window) {
    reg.validate();
    window.validate();
    if (!reg.unsafe_resolution) check_resolution(path.grid(), reg);
}

}  // namespace

LocalTimeValue local_time(const Path& path, const Regularization& reg, const TimeWindow& window) {
    prepare(path, reg, window);
    const auto quad = PairQuadrature::get(path.grid(), reg.eps, window);
    const auto rows = quad->rows();
    const auto w = quad->weights();
    const auto x = path.positions();
    const double c = kernel_prefactor(reg.a);
    const double inv = 1.0 / (2.0 * reg.a);
    std::vector<double> row_sums(rows.size());
    parallel_for(rows.size(), [&](std::size_t r) {
        const auto& row = rows[r];
        const Vec3 xi = x[row.i];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.count; ++k) {
            const double r2 = norm2(xi - x[row.j_begin + k]);
            acc += w[row.offset + k] * (c * std::exp(-r2 * inv));
        }
        row_sums[r] = acc;
    });
    return LocalTimeValue{pairwise_sum(row_sums), reg, window, path.grid().n_steps()};
}

double j_tilde(const Path& path, double u, const Direction& h, const Regularization& reg,
               const TimeWindow& window) {
    if (!(path.grid() == h.grid)) throw InvalidArgument("j_tilde: path and direction grids differ");
    prepare(path, reg, window);
    if (u == 0.0) return 0.0;
    const auto quad = PairQuadrature::get(path.grid(), reg.eps, window);
    const auto rows = quad->rows();
    const auto w = quad->weights();
    const auto x = path.positions();
    const double c = kernel_prefactor(reg.a);
    const double inv = 1.0 / (2.0 * reg.a);
    std::vector<double> row_sums(rows.size());
    parallel_for(rows.size(), [&](std::size_t r) {
        const auto& row = rows[r];
        const Vec3 xi = x[row.i];
        const Vec3 hi = h.h[row.i];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.count; ++k) {
            const std::size_t j = row.j_begin + k;
            const Vec3 d = xi - x[j];
            const Vec3 ds = d + u * (hi - h.h[j]);
            acc += w[row.offset + k] * (c * std::exp(-norm2(ds) * inv) - c * std::exp(-norm2(d) * inv));
        }
        row_sums[r] = acc;
    });
    return pairwise_sum(row_sums);
}

double j_hat(const Path& path, double u1, double u2, const Direction& h, const Regularization& reg,
             const TimeWindow& window) {
    if (u1 == u2) {
        prepare(path, reg, window);
        return 0.0;
    }
    return j_tilde(path, u1, h, reg, window) - j_tilde(path, u2, h, reg, window);
}

std::vector<Vec3> local_time_gradient(const Path& path, const Regularization& reg,
                                      const TimeWindow& window) {
    return local_time_with_gradient(path, reg, window).gradient;
}

LocalTimeGradient local_time_with_gradient(const Path& path, const Regularization& reg,
                                           const TimeWindow& window) {
    prepare(path, reg, window);
    const auto quad = PairQuadrature::get(path.grid(), reg.eps, window);
    const auto rows = quad->rows();
    const auto w = quad->weights();
    const auto x = path.positions();
    const double c = kernel_prefactor(reg.a);
    const double inv = 1.0 / (2.0 * reg.a);
    const double inv_a = 1.0 / reg.a;
    std::vector<Vec3> pair_force(w.size());
    std::vector<Vec3> grad(x.size());
    std::vector<double> row_sums(rows.size());
    parallel_for(rows.size(), [&](std::size_t r) {
        const auto& row = rows[r];
        const Vec3 xi = x[row.i];
        Vec3 acc{};
        double sum = 0.0;
        for (std::size_t k = 0; k < row.count; ++k) {
            const Vec3 d = xi - x[row.j_begin + k];
            const double wp = w[row.offset + k] * (c * std::exp(-norm2(d) * inv));
            const Vec3 g = (-wp * inv_a) * d;
            pair_force[row.offset + k] = g;
            acc += g;
            sum += wp;
        }
        grad[row.i] = acc;
        row_sums[r] = sum;
    });
    // Column contributions, rows visited in a fixed order.
    parallel_for(x.size(), [&](std::size_t j) {
        Vec3 acc{};
        for (const auto& row : rows) {
            if (j >= row.j_begin && j < row.j_begin + row.count) {
                acc += pair_force[row.offset + (j - row.j_begin)];
            }
        }
        grad[j] -= acc;
    });
    return LocalTimeGradient{pairwise_sum(row_sums), std::move(grad)};
}

double pinned_local_time(const Path& path, const Regularization& reg, std::span<const Pin> pins,
                         const TimeWindow& window) {
    return local_time(bridge_transform(path, pins), reg, window).value;
}

double richardson(double j_a, double j_half, double rate) {
    if (!(rate > 0)) throw InvalidArgument("richardson: rate must be > 0");
    return j_half + (j_half - j_a) / (std::exp2(rate) - 1.0);
}

double richardson(std::span<const double> by_halving, double rate) {
    if (by_halving.empty()) throw InvalidArgument("richardson: no values");
    if (!(rate > 0)) throw InvalidArgument("richardson: rate must be > 0");
    std::vector<double> t(by_halving.begin(), by_halving.end());
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double f = std::exp2(rate * static_cast<double>(k));
        for (std::size_t i = t.size() - 1; i >= k; --i) t[i] = t[i] + (t[i] - t[i - 1]) / (f - 1.0);
    }
    return t.back();
}

Extrapolated local_time_extrapolated(const Path& path, const Regularization& reg,
                                     const TimeWindow& window, double rate) {
    reg.validate();
    const double eps[1] = {reg.eps};
    const double as[2] = {reg.a, 0.5 * reg.a};
    const auto vals = local_time_batch(path, eps, as, window, reg.unsafe_resolution);
    Extrapolated out;
    out.j_a = vals[0][0];
    out.j_half = vals[0][1];
    out.value = richardson(out.j_a, out.j_half, rate);
    out.gap = std::abs(out.value - out.j_a);
    return out;
}

std::vector<std::vector<double>> local_time_batch(const Path& path, std::span<const double> eps,
                                                  std::span<const double> a,
                                                  const TimeWindow& window, bool unsafe_resolution) {
    window.validate();
    const std::size_t ne = eps.size();
    const std::size_t na = a.size();
    if (ne == 0 || na == 0) throw InvalidArgument("local_time_batch: empty parameter list");
    std::vector<std::shared_ptr<const PairQuadrature>> quads;
    for (double e : eps) {
        for (double av : a) {
            Regularization reg;
            reg.eps = e;
            reg.a = av;
            reg.validate();
            if (!unsafe_resolution) check_resolution(path.grid(), reg);
        }
        quads.push_back(PairQuadrature::get(path.grid(), e, window));
    }
    std::vector<double> c(na), inv(na);
    for (std::size_t ia = 0; ia < na; ++ia) {
        c[ia] = kernel_prefactor(a[ia]);
        inv[ia] = 1.0 / (2.0 * a[ia]);
    }
    // exp(-r^2/a) is the square of exp(-r^2/2a): one exponential serves a
    // whole halving ladder.
    std::vector<char> halves(na, 0);
    for (std::size_t ia = 1; ia < na; ++ia) halves[ia] = (a[ia] == 0.5 * a[ia - 1]);
    // Row r of the union corresponds to sigma node i; each eps has its own
    // row list, found through the node index.
    const std::size_t nodes = path.grid().nodes();
    std::vector<std::vector<long>> row_index(ne, std::vector<long>(nodes, -1));
    for (std::size_t ie = 0; ie < ne; ++ie) {
        const auto rows = quads[ie]->rows();
        for (std::size_t r = 0; r < rows.size(); ++r) row_index[ie][rows[r].i] = static_cast<long>(r);
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t ie = 0; ie < ne; ++ie) {
            if (row_index[ie][i] >= 0) {
                active.push_back(i);
                break;
            }
        }
    }
    // sums[(ie * na + ia)][r]
    std::vector<std::vector<double>> sums(ne * na);
    for (std::size_t ie = 0; ie < ne; ++ie) {
        for (std::size_t ia = 0; ia < na; ++ia) sums[ie * na + ia].assign(quads[ie]->rows().size(), 0.0);
    }
    const auto x = path.positions();
    parallel_for(active.size(), [&](std::size_t q) {
        const std::size_t i = active[q];
        std::size_t j_lo = std::numeric_limits<std::size_t>::max();
        std::size_t j_hi = 0;
        std::vector<const PairQuadrature::Row*> row(ne, nullptr);
        for (std::size_t ie = 0; ie < ne; ++ie) {
            if (row_index[ie][i] < 0) continue;
            row[ie] = &quads[ie]->rows()[static_cast<std::size_t>(row_index[ie][i])];
            j_lo = std::min(j_lo, row[ie]->j_begin);
            j_hi = std::max(j_hi, row[ie]->j_begin + row[ie]->count);
        }
        std::vector<double> acc(ne * na, 0.0);
        std::vector<double> p(na), e(na);
        const Vec3 xi = x[i];
        for (std::size_t j = j_lo; j < j_hi; ++j) {
            const double r2 = norm2(xi - x[j]);
            for (std::size_t ia = 0; ia < na; ++ia) {
                if (halves[ia]) {
                    e[ia] = e[ia - 1] * e[ia - 1];
                } else {
                    e[ia] = std::exp(-r2 * inv[ia]);
                }
                p[ia] = c[ia] * e[ia];
            }
            for (std::size_t ie = 0; ie < ne; ++ie) {
                const auto* rw = row[ie];
                if (rw == nullptr || j < rw->j_begin || j >= rw->j_begin + rw->count) continue;
                const double wt = quads[ie]->weights()[rw->offset + (j - rw->j_begin)];
                for (std::size_t ia = 0; ia < na; ++ia) acc[ie * na + ia] += wt * p[ia];
            }
        }
        for (std::size_t ie = 0; ie < ne; ++ie) {
            if (row_index[ie][i] < 0) continue;
            const auto r = static_cast<std::size_t>(row_index[ie][i]);
            for (std::size_t ia = 0; ia < na; ++ia) sums[ie * na + ia][r] = acc[ie * na + ia];
        }
    });
    std::vector<std::vector<double>> out(ne, std::vector<double>(na));
    for (std::size_t ie = 0; ie < ne; ++ie) {
        for (std::size_t ia = 0; ia < na; ++ia) out[ie][ia] = pairwise_sum(sums[ie * na + ia]);
    }
    return out;
}

}  // namespace polymer
