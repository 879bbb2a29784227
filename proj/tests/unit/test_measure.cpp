#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polymer/error.hpp"
#include "polymer/localtime.hpp"
#include "polymer/measure.hpp"
#include "polymer/renorm.hpp"

using namespace polymer;

TEST(Observables, Values) {
    const TimeGrid g(4);
    const Path p(g, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 0, 0}, {0, 2, 0}});
    EXPECT_EQ(end_to_end_sq(p), 4.0);
    EXPECT_DOUBLE_EQ(midpoint_gaussian(p), std::exp(-2.0));
    EXPECT_DOUBLE_EQ(cylinder_observable(p), std::exp(-6.0));
}

TEST(Ensemble, LambdaZeroIsUniform) {
    const auto ens = importance_sample(TimeGrid(32), Regularization::fixed(0.25, 0.125), 0.0, 100, 3);
    ASSERT_EQ(ens.size(), 100u);
    for (double w : ens.weights) EXPECT_DOUBLE_EQ(w, 0.01);
    EXPECT_DOUBLE_EQ(ens.normalizer_estimate, 1.0);
    EXPECT_NEAR(ens.ess, 100.0, 1e-9);
    EXPECT_FALSE(ens.low_ess);
}

TEST(Ensemble, WeightsAreNormalizedBoltzmannFactors) {
    const TimeGrid g(64);
    const auto reg = Regularization::fixed(0.2, 0.1);
    const double lam = 1.5;
    const auto ens = importance_sample(g, reg, lam, 50, 4);
    std::vector<double> raw(50);
    for (std::size_t i = 0; i < 50; ++i) raw[i] = std::exp(-j_bar(ens.path(i), reg, lam).jbar);
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(ens.weights[i], raw[i] / sum, 1e-12);
    EXPECT_NEAR(ens.normalizer_estimate, sum / 50, 1e-12 * sum);
    EXPECT_NEAR(ens.log_normalizer, std::log(sum / 50), 1e-12);
    double w2 = 0;
    for (double w : ens.weights) w2 += w * w;
    EXPECT_NEAR(ens.ess, 1 / w2, 1e-9);
}

TEST(Ensemble, PathsRegenerateFromSeed) {
    const auto ens = importance_sample(TimeGrid(16), Regularization::fixed(0.5, 0.25), 0.0, 10, 9);
    const auto p = ens.path(7);
    const auto q = sample_wiener(TimeGrid(16), 9, 7);
    for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(p[i], q[i]);
}

TEST(Ensemble, MeanInvariantUnderPermutation) {
    std::vector<double> lw = {0.1, -2.0, 0.7, 1.3, -0.4, 0.0};
    std::vector<double> vals = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto a = make_ensemble(TimeGrid(4), 1, lw).mean(vals);
    std::vector<std::size_t> idx = {3, 0, 5, 1, 4, 2};
    std::vector<double> lw2, vals2;
    for (auto i : idx) {
        lw2.push_back(lw[i]);
        vals2.push_back(vals[i]);
    }
    const auto b = make_ensemble(TimeGrid(4), 1, lw2).mean(vals2);
    EXPECT_NEAR(a.mean, b.mean, 1e-14);
    EXPECT_NEAR(a.se, b.se, 1e-14);
}

TEST(Ensemble, Errors) {
    EXPECT_THROW(make_ensemble(TimeGrid(4), 1, {0.0}), InvalidArgument);
    EXPECT_THROW(importance_sample(TimeGrid(32), Regularization::fixed(0.25, 0.125), -1.0, 10, 1),
                 InvalidArgument);
}

TEST(Pcn, ProposalAndAcceptance) {
    const TimeGrid g(8);
    const auto w = sample_wiener(g, 1, 0);
    const auto xi = sample_wiener(g, 1, 1);
    const auto p = pcn_proposal(w, xi, 0.6);
    for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(norm(p[i] - (0.8 * w[i] + 0.6 * xi[i])), 0, 1e-15);
    EXPECT_EQ(pcn_log_acceptance(2.0, 1.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(pcn_log_acceptance(1.0, 3.0, 0.5), -1.0);
    EXPECT_THROW(McmcChain::start(w, Regularization::fixed(0.5, 0.25), 1.0, 0.0), InvalidArgument);
}

TEST(Pcn, LambdaZeroSamplesWiener) {
    const TimeGrid g(16);
    const Observable obs[1] = {end_to_end_sq};
    ChainOptions opt;
    opt.steps = 20000;
    opt.burn_in = 100;
    opt.thin = 4;
    opt.seed = 5;
    const auto run = run_pcn(g, Regularization::fixed(0.5, 0.25), 0.0, 0.5, obs, opt);
    EXPECT_EQ(run.acceptance_rate, 1.0);
    ASSERT_EQ(run.series[0].size(), 5000u);
    std::vector<double> ref(5000);
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = end_to_end_sq(sample_wiener(g, 6, i));
    EXPECT_GT(ks_two_sample(run.series[0], ref).p_value, 1e-3);
    const auto m = chain_mean(run.series[0], 1);
    EXPECT_NEAR(m.mean, 3.0, 4 * m.se);
}

TEST(Pcn, ChainsAreConcatenated) {
    const TimeGrid g(16);
    const Observable obs[1] = {end_to_end_sq};
    ChainOptions opt;
    opt.steps = 200;
    opt.burn_in = 10;
    opt.seed = 7;
    opt.chains = 3;
    const auto run = run_pcn(g, Regularization::fixed(0.5, 0.25), 1.0, 0.3, obs, opt);
    EXPECT_EQ(run.series[0].size(), 600u);
    EXPECT_GT(run.acceptance_rate, 0.5);
    EXPECT_THROW(chain_mean(std::span<const double>(run.series[0]).first(599), 3), InvalidArgument);
}

TEST(TruncatedEnergy, ZeroPath) {
    // J(a) - J(a/2) on the zero path is known in closed form, so the
    // indicator is off once the gap exceeds one.
    const int level = 6;
    const double eps0 = 0.04;
    const auto reg = Regularization::at_level(level, eps0);
    const TimeGrid g = TimeGrid::resolving(reg.a / 2, reg.eps);
    const auto te = truncated_energy(Path::zero(g), level, 1.0, 1.0 / 256, eps0);
    const double area = 0.5 * (1 - reg.eps) * (1 - reg.eps);
    const double pa = std::pow(2 * M_PI * reg.a, -1.5);
    EXPECT_NEAR(te.J, area * pa, 1e-12 * te.J);
    EXPECT_NEAR(te.J_limit, area * (2 * std::pow(2.0, 1.5) - 1) * pa, 1e-12 * te.J);
    EXPECT_NEAR(te.gap, te.J_limit - te.J, 1e-12 * te.J);
    EXPECT_GT(te.gap, 1.0);
    EXPECT_FALSE(te.indicator);
    EXPECT_EQ(te.value, 0.0);
    EXPECT_THROW(truncated_energy(Path::zero(g), level, 1.0, 0.01, eps0), InvalidArgument);
}

TEST(TruncatedEnergy, ValueWhenKept) {
    const int level = 1;
    const double eps0 = 0.04;
    const auto reg = Regularization::at_level(level, eps0);
    const TimeGrid g = TimeGrid::resolving(reg.a / 2, reg.eps);
    for (std::uint64_t r = 0; r < 20; ++r) {
        const auto p = sample_wiener(g, 8, r);
        const auto te = truncated_energy(p, level, 0.5, 1.0 / 256, eps0);
        if (!te.indicator) continue;
        const double J = local_time(p, reg).value;
        EXPECT_NEAR(te.value, 0.5 * J - 0.5 * kappa1(reg.eps) + 0.25 * kappa2(reg.eps), 1e-12);
    }
}

TEST(MuEnsemble, LambdaZero) {
    const auto mu = mu_n_ensemble(2, 0.0, 1.0 / 256, 0.04, 20, 3);
    EXPECT_DOUBLE_EQ(mu.ensemble.normalizer_estimate, 1.0);
    EXPECT_GE(mu.truncated_fraction, 0.0);
    EXPECT_LE(mu.truncated_fraction, 1.0);
}

TEST(Schedule, LambdaZeroLevelsAgree) {
    const Observable obs[2] = {end_to_end_sq, midpoint_gaussian};
    const auto rep = schedule_convergence_report(0.0, obs, 1, 3, 0.04, 200, 4);
    ASSERT_EQ(rep.levels.size(), 3u);
    for (const auto& l : rep.levels) EXPECT_DOUBLE_EQ(l.normalizer, 1.0);
    for (const auto& d : rep.differences) {
        ASSERT_EQ(d.size(), 2u);
        for (double x : d) EXPECT_EQ(x, 0.0);
    }
    EXPECT_THROW(schedule_convergence_report(0.0, obs, 1, 2, 0.04, 10, 1), InvalidArgument);
}

TEST(Schedule, PositiveLambdaRuns) {
    const Observable obs[1] = {end_to_end_sq};
    const auto rep = schedule_convergence_report(1.0, obs, 1, 3, 0.04, 200, 4);
    for (const auto& l : rep.levels) {
        EXPECT_GT(l.ess, 1.0);
        EXPECT_TRUE(std::isfinite(l.log_normalizer));
        EXPECT_LT(l.means[0].mean, 3.5);
    }
}
