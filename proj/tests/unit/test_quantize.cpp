#include <gtest/gtest.h>

#include <cmath>

#include "polymer/error.hpp"
#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/quantize.hpp"

using namespace polymer;

namespace {

LangevinConfig config(double lambda, double tau, bool adjusted,
                      LangevinCoordinates coords = LangevinCoordinates::whitened) {
    LangevinConfig c;
    c.reg = Regularization::fixed(0.25, 0.125);
    c.lambda = lambda;
    c.tau = tau;
    c.adjusted = adjusted;
    c.coordinates = coords;
    return c;
}

}  // namespace

TEST(Potential, KineticPlusInteraction) {
    const TimeGrid g(32);
    const auto p = sample_wiener(g, 1, 0);
    const auto reg = Regularization::fixed(0.25, 0.125);
    double kin = 0;
    for (std::size_t i = 1; i < g.nodes(); ++i) kin += norm2(p[i] - p[i - 1]) / (2 * g.dt());
    EXPECT_NEAR(target_potential(p, reg, 0.0), kin, 1e-12 * kin);
    EXPECT_NEAR(target_potential(p, reg, 2.0), kin + 2 * local_time(p, reg).value, 1e-12 * kin);
}

TEST(Potential, GradientMatchesFiniteDifferences) {
    const TimeGrid g(32);
    const auto p = sample_wiener(g, 2, 0);
    const auto reg = Regularization::fixed(0.25, 0.125);
    const double lam = 1.5;
    const auto grad = target_potential_gradient(p, reg, lam);
    ASSERT_EQ(grad.size(), g.nodes());
    EXPECT_EQ(grad[0], Vec3{});
    const double step = 1e-6;
    double worst = 0, scale = 0;
    for (std::size_t i = 1; i < g.nodes(); ++i) {
        for (int k = 0; k < 3; ++k) {
            std::vector<Vec3> up(p.positions().begin(), p.positions().end()), dn = up;
            up[i][k] += step;
            dn[i][k] -= step;
            const double fd =
                (target_potential(Path(g, up), reg, lam) - target_potential(Path(g, dn), reg, lam)) / (2 * step);
            worst = std::max(worst, std::abs(fd - grad[i][k]));
            scale = std::max(scale, std::abs(fd));
        }
    }
    EXPECT_LT(worst, 1e-6 * scale);
}

TEST(Langevin, StepSizeLimits) {
    const TimeGrid g(32);
    EXPECT_NO_THROW(config(1.0, g.dt(), true).validate(g));
    EXPECT_THROW(config(1.0, 1.01 * g.dt(), true).validate(g), InvalidArgument);
    EXPECT_THROW(config(1.0, 0.3 * g.dt(), true, LangevinCoordinates::nodal).validate(g), InvalidArgument);
    EXPECT_NO_THROW(config(1.0, 0.25 * g.dt(), true, LangevinCoordinates::nodal).validate(g));
    EXPECT_THROW(config(1.0, 0.0, true).validate(g), InvalidArgument);
    EXPECT_THROW(config(-1.0, g.dt(), true).validate(g), InvalidArgument);
}

TEST(Langevin, AdjustedLambdaZeroSamplesWiener) {
    const TimeGrid g(8);
    const Observable obs[1] = {end_to_end_sq};
    ChainOptions opt;
    opt.steps = 40000;
    opt.burn_in = 500;
    opt.seed = 3;
    opt.chains = 2;
    const auto tr = run_langevin(g, config(0.0, g.dt(), true), obs, opt);
    const auto m = chain_mean(tr.series[0], 2);
    EXPECT_NEAR(m.mean, 3.0, 4 * m.se);
    EXPECT_GT(tr.acceptance_rate, 0.9);
}

TEST(Langevin, UnadjustedBiasMatchesArOneLimit) {
    // At lambda = 0 each whitened increment follows z' = (1 - tau) z +
    // sqrt(2 tau) xi, whose stationary variance is 1 / (1 - tau/2).
    const TimeGrid g(8);
    const Observable obs[1] = {end_to_end_sq};
    for (double tau : {g.dt(), g.dt() / 2}) {
        ChainOptions opt;
        opt.steps = 100000;
        opt.burn_in = 1000;
        opt.seed = 4;
        opt.chains = 2;
        const auto tr = run_langevin(g, config(0.0, tau, false), obs, opt);
        EXPECT_EQ(tr.acceptance_rate, 1.0);
        const auto m = chain_mean(tr.series[0], 2);
        EXPECT_NEAR(m.mean, 3.0 / (1 - tau / 2), 4 * m.se) << tau;
    }
}

TEST(Langevin, InteractingChainStaysPinnedAndBounded) {
    const TimeGrid g(32);
    const Observable obs[1] = {end_to_end_sq};
    ChainOptions opt;
    opt.steps = 500;
    opt.burn_in = 50;
    opt.seed = 5;
    for (auto coords : {LangevinCoordinates::whitened, LangevinCoordinates::nodal}) {
        const double tau = coords == LangevinCoordinates::whitened ? g.dt() : g.dt() / 4;
        const auto tr = run_langevin(g, config(2.0, tau, true, coords), obs, opt);
        EXPECT_TRUE(tr.origin_pinned);
        EXPECT_LT(tr.max_node_norm, 20.0);
        // Nodal MALA at its stability bound mixes poorly but must still move.
        EXPECT_GT(tr.acceptance_rate, coords == LangevinCoordinates::whitened ? 0.3 : 0.0);
        EXPECT_EQ(tr.final_path[0], Vec3{});
        EXPECT_EQ(tr.series[0].size(), 500u);
    }
}

TEST(Langevin, SingleStepBookkeeping) {
    const TimeGrid g(32);
    const auto cfg = config(1.0, g.dt(), true);
    auto st = LangevinState::start(sample_wiener(g, 6, 0), cfg);
    EXPECT_EQ(st.gradient.size(), g.n_steps());
    RngStream rng(6, 1);
    std::size_t acc = 0;
    for (int i = 0; i < 20; ++i) acc += langevin_step(st, cfg, rng);
    EXPECT_EQ(st.steps, 20u);
    EXPECT_EQ(st.accepted, acc);
    EXPECT_NEAR(st.potential, target_potential(st.path, cfg.reg, 1.0), 1e-10 * st.potential);
}

TEST(Drift, ZeroDirectionGivesZero) {
    const int level = 2;
    const double eps0 = 0.04;
    const auto reg = Regularization::at_level(level, eps0);
    const TimeGrid g = TimeGrid::resolving(reg.a, reg.eps);
    const auto ens = importance_sample(g, reg, 0.0, 20, 7);
    const auto d = drift_directional_estimate(ens, Direction::zero(g), 0.1, level, eps0);
    EXPECT_EQ(d.value, 0.0);
    EXPECT_TRUE(d.exploratory);
}

TEST(Drift, ExtrapolationIdentity) {
    const int level = 2;
    const double eps0 = 0.04;
    const auto reg = Regularization::at_level(level, eps0);
    const TimeGrid g = TimeGrid::resolving(reg.a, reg.eps);
    const auto ens = importance_sample(g, reg, 0.0, 50, 8);
    const auto d = drift_directional_estimate(ens, preset_direction(DirectionPreset::sine, g), 0.2, level, eps0);
    EXPECT_NEAR(d.value, 2 * d.at_half - d.at_s, 1e-12);
    EXPECT_GT(d.se_s, 0.0);
    EXPECT_THROW(drift_directional_estimate(ens, preset_direction(DirectionPreset::sine, g), 0.0, level, eps0),
                 InvalidArgument);
    EXPECT_THROW(drift_directional_estimate(ens, preset_direction(DirectionPreset::sine, TimeGrid(8)), 0.1,
                                            level, eps0),
                 InvalidArgument);
}
