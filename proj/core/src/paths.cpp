#include "polymer/paths.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "polymer/error.hpp"

namespace polymer {

TimeGrid::TimeGrid(std::size_t n_steps) : n_steps_(n_steps), dt_(0.0) {
    if (n_steps == 0 || !std::has_single_bit(n_steps)) {
        throw InvalidArgument("TimeGrid: n_steps must be a positive power of two, got " +
                              std::to_string(n_steps));
    }
    dt_ = 1.0 / static_cast<double>(n_steps);
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(nodes());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
    return t;
}

bool TimeGrid::is_aligned(double t) const {
    if (!(t >= -1e-12 && t <= 1.0 + 1e-12)) return false;
    const double k = t / dt_;
    return std::abs(k - std::round(k)) <= 1e-9;
}

std::size_t TimeGrid::index_of(double t) const {
    if (!is_aligned(t)) {
        throw InvalidArgument("time " + std::to_string(t) + " is not a node of the grid with " +
                              std::to_string(n_steps_) + " steps");
    }
    return static_cast<std::size_t>(std::llround(t / dt_));
}

TimeGrid TimeGrid::resolving(double a, double eps, std::size_t min_steps) {
    if (!(a > 0) || !(eps > 0)) throw InvalidArgument("TimeGrid::resolving: need a > 0, eps > 0");
    std::size_t n = std::bit_ceil(std::max<std::size_t>(min_steps, 1));
    while (1.0 / static_cast<double>(n) > a / 4.0 || 1.0 / static_cast<double>(n) > eps / 8.0) {
        n *= 2;
        if (n > (std::size_t{1} << 24)) throw InvalidArgument("TimeGrid::resolving: grid too fine");
    }
    return TimeGrid(n);
}

Path::Path(TimeGrid grid, std::vector<Vec3> positions)
    : grid_(grid), positions_(std::move(positions)) {
    if (positions_.size() != grid_.nodes()) {
        throw InvalidArgument("Path: expected " + std::to_string(grid_.nodes()) + " positions, got " +
                              std::to_string(positions_.size()));
    }
    if (!(positions_[0] == Vec3{})) throw InvalidArgument("Path: paths start at the origin");
}

Path Path::zero(const TimeGrid& grid) { return Path(grid, std::vector<Vec3>(grid.nodes())); }

Direction Direction::from_samples(const TimeGrid& grid, std::vector<Vec3> h, DirectionClass cls) {
    const std::size_t n = grid.nodes();
    if (h.size() != n) throw InvalidArgument("Direction: sample count does not match grid");
    if (!(h[0] == Vec3{})) throw InvalidArgument("Direction: h(0) must vanish");
    const double dt = grid.dt();
    auto derivative = [&](const std::vector<Vec3>& f) {
        std::vector<Vec3> d(n);
        if (n == 2) {
            d[0] = d[1] = (f[1] - f[0]) * (1.0 / dt);
            return d;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * (0.5 / dt);
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * (0.5 / dt);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * (0.5 / dt);
        return d;
    };
    auto h1 = derivative(h);
    auto h2 = derivative(h1);
    return Direction{grid, std::move(h), std::move(h1), std::move(h2), cls};
}

Direction Direction::zero(const TimeGrid& grid) {
    return Direction{grid, std::vector<Vec3>(grid.nodes()), std::vector<Vec3>(grid.nodes()),
                     std::vector<Vec3>(grid.nodes()), DirectionClass::K0};
}

Direction Direction::scaled(double c) const {
    Direction out = *this;
    for (auto* v : {&out.h, &out.h1, &out.h2}) {
        for (auto& p : *v) p *= c;
    }
    return out;
}

double Direction::max_abs_h1() const {
    double m = 0;
    for (const auto& p : h1) m = std::max(m, norm(p));
    return m;
}

double Direction::max_abs_h2() const {
    double m = 0;
    for (const auto& p : h2) m = std::max(m, norm(p));
    return m;
}

Direction preset_direction(DirectionPreset kind, const TimeGrid& grid) {
    const std::size_t n = grid.nodes();
    Direction dir{grid, std::vector<Vec3>(n), std::vector<Vec3>(n), std::vector<Vec3>(n),
                  DirectionClass::K0};
    constexpr double pi = std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.time(i);
        switch (kind) {
            case DirectionPreset::linear:
                dir.h[i].x = t;
                dir.h1[i].x = 1.0;
                dir.h2[i].x = 0.0;
                break;
            case DirectionPreset::sine:
                dir.h[i].x = std::sin(pi * t) / pi;
                dir.h1[i].x = std::cos(pi * t);
                dir.h2[i].x = -pi * std::sin(pi * t);
                break;
            case DirectionPreset::poly:
                dir.h[i].x = t * t * (1.0 - t);
                dir.h1[i].x = 2.0 * t - 3.0 * t * t;
                dir.h2[i].x = 2.0 - 6.0 * t;
                break;
        }
    }
    // sin(pi) is not exactly zero in floating point.
    if (kind == DirectionPreset::sine) dir.h[n - 1].x = 0.0;
    return dir;
}

DirectionPreset parse_direction_preset(const std::string& name) {
    if (name == "linear") return DirectionPreset::linear;
    if (name == "sine") return DirectionPreset::sine;
    if (name == "poly") return DirectionPreset::poly;
    throw InvalidArgument("unknown direction preset '" + name + "' (linear, sine, poly)");
}

Path sample_wiener(const TimeGrid& grid, RngStream& rng) {
    std::vector<Vec3> pos(grid.nodes());
    const double sd = std::sqrt(grid.dt());
    for (std::size_t i = 1; i < pos.size(); ++i) {
        const double gx = rng.normal();
        const double gy = rng.normal();
        const double gz = rng.normal();
        pos[i] = pos[i - 1] + Vec3{sd * gx, sd * gy, sd * gz};
    }
    return Path(grid, std::move(pos));
}

Path sample_wiener(const TimeGrid& grid, std::uint64_t seed, std::uint64_t replica) {
    RngStream rng(seed, replica);
    return sample_wiener(grid, rng);
}

Path shift(const Path& path, double u, const Direction& h) {
    if (!(path.grid() == h.grid)) throw InvalidArgument("shift: path and direction grids differ");
    std::vector<Vec3> pos(path.positions().begin(), path.positions().end());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] += u * h.h[i];
    return Path(path.grid(), std::move(pos));
}

Path bridge_transform(const Path& path, std::span<const Pin> pins) {
    const TimeGrid& grid = path.grid();
    if (pins.empty()) return path;
    std::vector<std::size_t> idx(pins.size());
    for (std::size_t k = 0; k < pins.size(); ++k) {
        idx[k] = grid.index_of(pins[k].time);
        if (idx[k] == 0) throw InvalidArgument("bridge_transform: pin times must be positive");
        if (k > 0 && idx[k] <= idx[k - 1]) {
            throw InvalidArgument("bridge_transform: pin times must be strictly increasing");
        }
    }
    const auto w = path.positions();
    std::vector<Vec3> out(w.size());
    // Before the first pin: bridge from (0, 0) to (t_1, x_1).
    {
        const double t1 = grid.time(idx[0]);
        for (std::size_t i = 0; i <= idx[0]; ++i) {
            const double r = grid.time(i) / t1;
            out[i] = r * pins[0].point + w[i] - r * w[idx[0]];
        }
        out[idx[0]] = pins[0].point;
    }
    for (std::size_t k = 0; k + 1 < pins.size(); ++k) {
        const std::size_t lo = idx[k], hi = idx[k + 1];
        const double span = grid.time(hi) - grid.time(lo);
        const Vec3& x = pins[k].point;
        const Vec3& y = pins[k + 1].point;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double r = (grid.time(i) - grid.time(lo)) / span;
            out[i] = (1.0 - r) * x + r * y + (w[i] - w[lo] - r * (w[hi] - w[lo]));
        }
        out[lo] = x;
        out[hi] = y;
    }
    {
        const std::size_t last = idx.back();
        for (std::size_t i = last; i < w.size(); ++i) out[i] = pins.back().point + w[i] - w[last];
        out[last] = pins.back().point;
    }
    out[0] = Vec3{};
    return Path(grid, std::move(out));
}

Path bridge_transform(const Path& path, double u, double v, const Vec3& x, const Vec3& y) {
    if (!(u < v)) throw InvalidArgument("bridge_transform: need u < v");
    if (!(u > 0) || v > 1.0) throw InvalidArgument("bridge_transform: need 0 < u < v <= 1");
    const Pin pins[2] = {{u, x}, {v, y}};
    return bridge_transform(path, pins);
}

}  // namespace polymer
