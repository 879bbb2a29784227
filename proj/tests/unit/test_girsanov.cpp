#include <gtest/gtest.h>

#include <cmath>

#include "polymer/error.hpp"
#include "polymer/girsanov.hpp"
#include "polymer/localtime.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST(CameronMartinV, LinearDirectionClosedForm) {
    const TimeGrid g(32);
    const auto p = sample_wiener(g, 1, 0);
    const auto h = preset_direction(DirectionPreset::linear, g);
    for (double u : {-1.0, 0.5, 2.0}) EXPECT_NEAR(cameron_martin_V(p, u, h), u * p.end().x - 0.5 * u * u, 1e-13);
    EXPECT_EQ(cameron_martin_V(p, 0.0, h), 0.0);
}

TEST(CameronMartinV, QuadraticInU) {
    const TimeGrid g(64);
    const auto p = sample_wiener(g, 2, 0);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const double v1 = cameron_martin_V(p, 1.0, h);
    const double v2 = cameron_martin_V(p, 2.0, h);
    const double vm = cameron_martin_V(p, -1.0, h);
    // V(u) = u A - u^2 B
    const double A = 0.5 * (v1 - vm);
    const double B = -0.5 * (v1 + vm);
    EXPECT_NEAR(v2, 2 * A - 4 * B, 1e-12);
    EXPECT_NEAR(B, 0.25, 1e-3);  // int cos^2(pi t) dt / 2
}

TEST(CameronMartinV, UnitMeanUnderWiener) {
    const TimeGrid g(64);
    const auto h = preset_direction(DirectionPreset::poly, g);
    const int M = 20000;
    std::vector<double> v(M);
    for (int m = 0; m < M; ++m) v[m] = std::exp(cameron_martin_V(sample_wiener(g, 3, m), 1.0, h));
    const auto ms = mean_se(v);
    EXPECT_NEAR(ms.mean, 1.0, 4 * ms.se);
}

TEST(CameronMartinV, RequiresK0AndMatchingGrid) {
    const TimeGrid g(16);
    auto h = preset_direction(DirectionPreset::sine, g);
    EXPECT_THROW(cameron_martin_V(Path::zero(TimeGrid(8)), 1.0, h), InvalidArgument);
    h.cls = DirectionClass::K;
    EXPECT_THROW(cameron_martin_V(Path::zero(g), 1.0, h), InvalidArgument);
}

TEST(PullbackDifference, EvaluatesShiftedMinusBase) {
    const TimeGrid g(16);
    const auto p = sample_wiener(g, 4, 0);
    const auto h = preset_direction(DirectionPreset::linear, g);
    const double d = pullback_difference(p, 0.5, h, [](const Path& q) { return q.end().x; });
    EXPECT_DOUBLE_EQ(d, (p.end().x - 0.5) - p.end().x);
}

TEST(Density, TrivialCases) {
    const TimeGrid g(32);
    const auto p = sample_wiener(g, 5, 0);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto reg = Regularization::fixed(0.25, 0.125);
    const auto zero = a_uh_estimate(p, 0.0, h, 1.0, reg);
    EXPECT_EQ(zero.value, 1.0);
    EXPECT_EQ(zero.log_value, 0.0);
    const auto free = a_uh_estimate(p, 0.7, h, 0.0, reg);
    EXPECT_DOUBLE_EQ(free.value, std::exp(cameron_martin_V(p, 0.7, h)));
    EXPECT_EQ(free.rho_part, 0.0);
    const auto inter = a_uh_estimate(p, 0.7, h, 2.0, reg);
    EXPECT_NEAR(inter.rho_part, local_time(shift(p, -0.7, h), reg).value - local_time(p, reg).value, 1e-12);
    EXPECT_NEAR(inter.log_value, -2.0 * inter.rho_part + inter.v_part, 1e-14);
    EXPECT_THROW(a_uh_estimate(p, 0.7, h, -1.0, reg), InvalidArgument);
}

TEST(Density, LevelOverload) {
    const int level = 2;
    const double eps0 = 0.04;
    const TimeGrid g = level_grid(level, eps0);
    const auto p = sample_wiener(g, 6, 0);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto a = a_uh_estimate(p, 0.3, h, 1.0, level, eps0);
    const auto b = a_uh_estimate(p, 0.3, h, 1.0, Regularization::at_level(level, eps0));
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.level, std::optional<int>(level));
}

TEST(Density, Cocycle) {
    // a_{(u1+u2)h}(w) = a_{u2 h}(w) a_{u1 h}(w - u2 h)
    const TimeGrid g(32);
    const auto p = sample_wiener(g, 7, 0);
    const auto h = preset_direction(DirectionPreset::linear, g);
    const auto reg = Regularization::fixed(0.25, 0.125);
    const double u1 = 0.5, u2 = -0.25, lam = 1.5;
    const double whole = a_uh_estimate(p, u1 + u2, h, lam, reg).log_value;
    const double parts =
        a_uh_estimate(p, u2, h, lam, reg).log_value + a_uh_estimate(shift(p, -u2, h), u1, h, lam, reg).log_value;
    EXPECT_NEAR(whole, parts, 1e-10);
}

TEST(QuasiInvariance, CameronMartinAtLambdaZero) {
    const TimeGrid g(32);
    for (auto kind : {DirectionPreset::sine, DirectionPreset::poly}) {
        const auto h = preset_direction(kind, g);
        const auto rep = quasi_invariance_check(cylinder_observable, 1.0, h, 0.0, Regularization::fixed(0.25, 0.125),
                                                4000, 8);
        EXPECT_TRUE(rep.pass) << rep.lhs << " " << rep.rhs << " " << rep.combined_se;
        EXPECT_GT(rep.combined_se, 0.0);
    }
}

TEST(QuasiInvariance, Interacting) {
    const TimeGrid g(32);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto rep =
        quasi_invariance_check(midpoint_gaussian, 0.5, h, 1.0, Regularization::fixed(0.25, 0.125), 4000, 9);
    EXPECT_TRUE(rep.pass) << rep.lhs << " " << rep.rhs << " " << rep.combined_se;
}

TEST(Dn, Identities) {
    const int level = 2;
    const double eps0 = 0.04;
    const TimeGrid g = level_grid(level, eps0);
    const auto p = sample_wiener(g, 10, 0);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto zero = D_n_lambda(p, 0.0, h, level, 1.0, 1.0 / 256, eps0);
    EXPECT_EQ(zero.value, 1.0);
    EXPECT_EQ(zero.indicator_base, zero.indicator_shifted);
    const auto free = D_n_lambda(p, 0.5, h, level, 0.0, 1.0 / 256, eps0);
    EXPECT_DOUBLE_EQ(free.value, std::exp(cameron_martin_V(p, 0.5, h)));
    const auto d = D_n_lambda(p, 0.5, h, level, 1.0, 1.0 / 256, eps0);
    const double shifted = truncated_energy(shift(p, -0.5, h), level, 1.0, 1.0 / 256, eps0).value;
    const double base = truncated_energy(p, level, 1.0, 1.0 / 256, eps0).value;
    EXPECT_NEAR(d.energy_difference, shifted - base, 1e-12);
}

TEST(LevelGrid, ResolvesHalfWidth) {
    const auto g = level_grid(4, 0.04);
    const auto reg = Regularization::at_level(4, 0.04);
    EXPECT_LE(g.dt(), reg.a / 8);
    EXPECT_LE(g.dt(), reg.eps / 8);
    EXPECT_EQ(level_grid(1, 0.04, 256).n_steps(), 256u);
}

TEST(MomentDecay, EqualShiftsGiveZero) {
    const TimeGrid g = level_grid(3, 0.04);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto rep = moment_decay_report(0.5, 0.5, h, 1.0, 2, 1, 3, 0.04, 20, 11);
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& r : rep.rows) {
        EXPECT_EQ(r.moment, 0.0);
        EXPECT_EQ(r.weighted_moment, 0.0);
    }
    EXPECT_EQ(rep.decay_exponent, 0.0);
}

TEST(MomentDecay, RowsAndValidation) {
    const TimeGrid g = level_grid(3, 0.04);
    const auto h = preset_direction(DirectionPreset::sine, g);
    const auto rep = moment_decay_report(1.0, -1.0, h, 0.0, 2, 0, 3, 0.04, 50, 12);
    ASSERT_EQ(rep.rows.size(), 3u);
    ASSERT_EQ(rep.ratios.size(), 2u);
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(rep.rows[r].level, static_cast<int>(r));
        EXPECT_GT(rep.rows[r].moment, 0.0);
        EXPECT_NEAR(rep.rows[r].weighted_moment, rep.rows[r].moment, 1e-12 * rep.rows[r].moment);
    }
    EXPECT_THROW(moment_decay_report(1.0, -1.0, h, 0.0, 3, 0, 3, 0.04, 50, 12), InvalidArgument);
    EXPECT_THROW(moment_decay_report(1.0, -1.0, h, 0.0, 2, 2, 2, 0.04, 50, 12), InvalidArgument);
    EXPECT_THROW(moment_decay_report(1.0, -1.0, preset_direction(DirectionPreset::sine, TimeGrid(8)), 0.0, 2, 0,
                                     3, 0.04, 50, 12),
                 ResolutionError);
}
