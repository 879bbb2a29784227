#include "polymer/quantize.hpp"

#include <cmath>
#include <string>

#include "polymer/error.hpp"
#include "polymer/parallel.hpp"

namespace polymer {

namespace {

std::vector<Vec3> increments(const Path& path) {
    const double s = 1.0 / std::sqrt(path.grid().dt());
    const auto w = path.positions();
    std::vector<Vec3> z(w.size() - 1);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = s * (w[i + 1] - w[i]);
    return z;
}

Path from_increments(const TimeGrid& grid, const std::vector<Vec3>& z) {
    const double s = std::sqrt(grid.dt());
    std::vector<Vec3> w(grid.nodes());
    for (std::size_t i = 0; i < z.size(); ++i) w[i + 1] = w[i] + s * z[i];
    return Path(grid, std::move(w));
}

struct Evaluation {
    double potential;
    std::vector<Vec3> gradient;
};

Evaluation evaluate(const Path& path, const LangevinConfig& cfg) {
    const auto& grid = path.grid();
    const std::size_t n = grid.n_steps();
    double J = 0.0;
    std::vector<Vec3> g(grid.nodes());
    if (cfg.lambda != 0.0) {
        auto lg = local_time_with_gradient(path, cfg.reg);
        J = lg.value;
        g = std::move(lg.gradient);
    }
    const auto z = increments(path);
    double quad = 0.0;
    for (const auto& v : z) quad += norm2(v);
    Evaluation ev{0.5 * quad + cfg.lambda * J, {}};
    if (cfg.coordinates == LangevinCoordinates::whitened) {
        ev.gradient.resize(n);
        const double sdt = std::sqrt(grid.dt());
        Vec3 suffix{};
        for (std::size_t i = n; i-- > 0;) {
            suffix += g[i + 1];
            ev.gradient[i] = z[i] + (cfg.lambda * sdt) * suffix;
        }
    } else {
        const double inv_dt = 1.0 / grid.dt();
        const auto w = path.positions();
        ev.gradient.assign(grid.nodes(), Vec3{});
        for (std::size_t k = 1; k <= n; ++k) {
            Vec3 q = inv_dt * (w[k] - w[k - 1]);
            if (k < n) q -= inv_dt * (w[k + 1] - w[k]);
            ev.gradient[k] = q + cfg.lambda * g[k];
        }
    }
    return ev;
}

}  // namespace

void LangevinConfig::validate(const TimeGrid& grid) const {
    reg.validate();
    if (!(lambda >= 0)) throw InvalidArgument("Langevin: lambda must be >= 0");
    const double limit = coordinates == LangevinCoordinates::whitened ? grid.dt() : 0.25 * grid.dt();
    if (!(tau > 0) || tau > limit * (1.0 + 1e-12)) {
        throw InvalidArgument("Langevin: step size tau=" + std::to_string(tau) + " must lie in (0, " +
                              std::to_string(limit) + "]");
    }
    if (lambda != 0.0 && !reg.unsafe_resolution) check_resolution(grid, reg);
}

double target_potential(const Path& path, const Regularization& reg, double lambda) {
    LangevinConfig cfg;
    cfg.reg = reg;
    cfg.lambda = lambda;
    double quad = 0.0;
    for (const auto& v : increments(path)) quad += norm2(v);
    const double J = lambda != 0.0 ? local_time(path, reg).value : 0.0;
    return 0.5 * quad + lambda * J;
}

std::vector<Vec3> target_potential_gradient(const Path& path, const Regularization& reg, double lambda) {
    LangevinConfig cfg;
    cfg.reg = reg;
    cfg.lambda = lambda;
    cfg.coordinates = LangevinCoordinates::nodal;
    return evaluate(path, cfg).gradient;
}

LangevinState LangevinState::start(Path path, const LangevinConfig& config) {
    config.validate(path.grid());
    auto ev = evaluate(path, config);
    return LangevinState{std::move(path), ev.potential, std::move(ev.gradient), 0, 0};
}

double LangevinState::acceptance_rate() const {
    return steps == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(steps);
}

bool langevin_step(LangevinState& state, const LangevinConfig& cfg, RngStream& rng) {
    const auto& grid = state.path.grid();
    const double tau = cfg.tau;
    const double noise = std::sqrt(2.0 * tau);
    const bool whitened = cfg.coordinates == LangevinCoordinates::whitened;

    // x: current coordinates; y: proposal.
    std::vector<Vec3> x = whitened ? increments(state.path)
                                   : std::vector<Vec3>(state.path.positions().begin(),
                                                       state.path.positions().end());
    std::vector<Vec3> y(x.size());
    const std::size_t first = whitened ? 0 : 1;
    for (std::size_t i = first; i < x.size(); ++i) {
        const double a = rng.normal();
        const double b = rng.normal();
        const double c = rng.normal();
        y[i] = x[i] - tau * state.gradient[i] + noise * Vec3{a, b, c};
    }
    Path proposal = whitened ? from_increments(grid, y) : Path(grid, y);
    auto ev = evaluate(proposal, cfg);
    const double log_u = std::log(rng.uniform());
    ++state.steps;
    bool accept = true;
    if (cfg.adjusted) {
        double fwd = 0.0, bwd = 0.0;
        for (std::size_t i = first; i < x.size(); ++i) {
            fwd += norm2(y[i] - x[i] + tau * state.gradient[i]);
            bwd += norm2(x[i] - y[i] + tau * ev.gradient[i]);
        }
        const double log_alpha = state.potential - ev.potential - (bwd - fwd) / (4.0 * tau);
        accept = log_u < log_alpha;
    }
    if (accept) {
        state.path = std::move(proposal);
        state.potential = ev.potential;
        state.gradient = std::move(ev.gradient);
        ++state.accepted;
    }
    return accept;
}

QuantizationTrace run_langevin(const TimeGrid& grid, const LangevinConfig& config,
                               std::span<const Observable> observables, const ChainOptions& opt) {
    config.validate(grid);
    if (opt.chains == 0 || opt.thin == 0) throw InvalidArgument("run_langevin: chains and thin must be >= 1");
    const std::size_t per_chain = opt.steps / opt.thin;
    const std::size_t K = observables.size();
    struct Part {
        std::vector<std::vector<double>> series;
        std::size_t accepted = 0;
        std::size_t steps = 0;
        double max_norm = 0.0;
        bool pinned = true;
        Path last{TimeGrid(1), std::vector<Vec3>(2)};
    };
    std::vector<Part> parts(opt.chains);
    parallel_for(opt.chains, [&](std::size_t c) {
        RngStream rng(opt.seed, c);
        auto state = LangevinState::start(sample_wiener(grid, rng), config);
        Part& part = parts[c];
        part.series.assign(K, {});
        auto track = [&] {
            for (const auto& p : state.path.positions()) part.max_norm = std::max(part.max_norm, norm(p));
            part.pinned = part.pinned && state.path[0] == Vec3{};
        };
        for (std::size_t s = 0; s < opt.burn_in; ++s) {
            langevin_step(state, config, rng);
            track();
        }
        const std::size_t acc0 = state.accepted;
        for (std::size_t s = 1; s <= per_chain * opt.thin; ++s) {
            langevin_step(state, config, rng);
            track();
            if (s % opt.thin == 0) {
                for (std::size_t k = 0; k < K; ++k) part.series[k].push_back(observables[k](state.path));
            }
        }
        part.accepted = state.accepted - acc0;
        part.steps = per_chain * opt.thin;
        part.last = state.path;
    });
    QuantizationTrace trace;
    trace.series.assign(K, {});
    std::size_t acc = 0, steps = 0;
    for (auto& part : parts) {
        for (std::size_t k = 0; k < K; ++k) {
            trace.series[k].insert(trace.series[k].end(), part.series[k].begin(), part.series[k].end());
        }
        acc += part.accepted;
        steps += part.steps;
        trace.max_node_norm = std::max(trace.max_node_norm, part.max_norm);
        trace.origin_pinned = trace.origin_pinned && part.pinned;
    }
    trace.acceptance_rate = steps ? static_cast<double>(acc) / static_cast<double>(steps) : 1.0;
    trace.final_path = parts.back().last;
    return trace;
}

DriftEstimate drift_directional_estimate(const WeightedEnsemble& ensemble, const Direction& k,
                                         double s_small, int level, double eps0) {
    if (!(s_small > 0 && s_small <= 0.5)) {
        throw InvalidArgument("drift_directional_estimate: s must lie in (0, 0.5]");
    }
    if (k.cls != DirectionClass::K0) throw InvalidArgument("drift_directional_estimate: k must be in K0");
    if (!(k.grid == ensemble.grid)) throw InvalidArgument("drift_directional_estimate: grid mismatch");
    const auto reg = Regularization::at_level(level, eps0);
    const std::size_t M = ensemble.size();
    std::vector<double> fs(M), fh(M), fx(M);
    const double h = 0.5 * s_small;
    parallel_for(M, [&](std::size_t i) {
        const Path path = ensemble.path(i);
        fs[i] = j_tilde(path, s_small, k, reg) / s_small;
        fh[i] = j_tilde(path, h, k, reg) / h;
        fx[i] = 2.0 * fh[i] - fs[i];
    });
    DriftEstimate out;
    out.level = level;
    const auto ms = ensemble.mean(fs);
    const auto mh = ensemble.mean(fh);
    const auto mx = ensemble.mean(fx);
    out.at_s = ms.mean;
    out.se_s = ms.se;
    out.at_half = mh.mean;
    out.se_half = mh.se;
    out.value = mx.mean;
    out.se = mx.se;
    return out;
}

}  // namespace polymer
