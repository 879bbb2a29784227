#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polymer/rng.hpp"
#include "polymer/vec3.hpp"

namespace polymer {

// Uniform grid on [0, 1] with a power-of-two number of steps, so levels can
// be refined by doubling.
class TimeGrid {
public:
    explicit TimeGrid(std::size_t n_steps);

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t nodes() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return dt_; }
    double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }
    std::vector<double> times() const;

    // Node index of a grid-aligned time; throws InvalidArgument otherwise.
    std::size_t index_of(double t) const;
    bool is_aligned(double t) const;

    // Smallest power-of-two grid with dt <= a/4 and dt <= eps/8.
    static TimeGrid resolving(double a, double eps, std::size_t min_steps = 1);

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t n_steps_;
    double dt_;
};

// A path started at the origin, sampled on a grid.
class Path {
public:
    Path(TimeGrid grid, std::vector<Vec3> positions);
    static Path zero(const TimeGrid& grid);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const Vec3> positions() const noexcept { return positions_; }
    const Vec3& operator[](std::size_t i) const { return positions_[i]; }
    const Vec3& end() const { return positions_.back(); }
    // Position at a grid-aligned time.
    const Vec3& at(double t) const { return positions_[grid_.index_of(t)]; }

private:
    TimeGrid grid_;
    std::vector<Vec3> positions_;
};

enum class DirectionClass { K, K0 };

// Cameron-Martin direction tabulated with its first and second derivatives.
struct Direction {
    TimeGrid grid;
    std::vector<Vec3> h;
    std::vector<Vec3> h1;
    std::vector<Vec3> h2;
    DirectionClass cls = DirectionClass::K0;

    // Builds h' and h'' by second-order finite differences.
    static Direction from_samples(const TimeGrid& grid, std::vector<Vec3> h,
                                  DirectionClass cls = DirectionClass::K0);
    static Direction zero(const TimeGrid& grid);

    Direction scaled(double c) const;
    double max_abs_h1() const;
    double max_abs_h2() const;
};

enum class DirectionPreset { linear, sine, poly };

// K0 members along e1: t, sin(pi t)/pi, t^2 (1 - t); derivatives are exact.
Direction preset_direction(DirectionPreset kind, const TimeGrid& grid);
DirectionPreset parse_direction_preset(const std::string& name);

Path sample_wiener(const TimeGrid& grid, RngStream& rng);
// Replica `replica` of an ensemble drawn with `seed`.
Path sample_wiener(const TimeGrid& grid, std::uint64_t seed, std::uint64_t replica);

// path + u h
Path shift(const Path& path, double u, const Direction& h);

struct Pin {
    double time;
    Vec3 point;
};

// Conditions the path to pass through each pin: before the first pin the
// path is bridged from the origin, between pins the increments are bridged
// and the pinned values interpolated linearly, after the last pin the
// increments are kept. Pin times must be strictly increasing, positive and
// grid aligned.
Path bridge_transform(const Path& path, std::span<const Pin> pins);
Path bridge_transform(const Path& path, double u, double v, const Vec3& x, const Vec3& y);

}  // namespace polymer
