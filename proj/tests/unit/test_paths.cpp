#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "lentp/lentp.hpp"

using namespace lentp;

namespace {

std::vector<double> column(std::size_t n, auto&& fn) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

}  // namespace

TEST(TimeGrid, RejectsBadInput) {
    EXPECT_THROW(TimeGrid(0.0, 10), ConfigError);
    EXPECT_THROW(TimeGrid(-1.0, 10), ConfigError);
    EXPECT_THROW(TimeGrid(1.0, 0), ConfigError);
    EXPECT_THROW(TimeGrid(INFINITY, 3), ConfigError);
}

TEST(TimeGrid, LastPointIsHorizonExactly) {
    const TimeGrid g(0.3, 7);
    EXPECT_EQ(g.time(7), 0.3);
    EXPECT_EQ(g.time(0), 0.0);
}

TEST(TimeGrid, SnapForward) {
    const TimeGrid g(1.0, 1000);
    EXPECT_EQ(g.snap_forward(0.5), 500u);
    EXPECT_EQ(g.snap_forward(0.3), 300u);  // 0.3/0.001 is not exact in binary
    EXPECT_EQ(g.snap_forward(0.50001), 501u);
    EXPECT_EQ(g.snap_forward(1e-12), 1u);
    EXPECT_EQ(g.snap_forward(1.0), 1000u);
    EXPECT_TRUE(g.on_grid(0.7));
    EXPECT_FALSE(g.on_grid(0.7005));
    EXPECT_THROW((void)g.snap_forward(0.0), DomainError);
    EXPECT_THROW((void)g.snap_forward(1.5), DomainError);
}

TEST(Rng, SameKeySameStream) {
    CounterEngine a(RngStream{7, 3, StreamFamily::brownian});
    CounterEngine b(RngStream{7, 3, StreamFamily::brownian});
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, KeysDifferAcrossEveryComponent) {
    const RngStream base{7, 3, StreamFamily::brownian, 0};
    std::set<std::uint64_t> keys{base.key(),
                                 RngStream{8, 3, StreamFamily::brownian, 0}.key(),
                                 RngStream{7, 4, StreamFamily::brownian, 0}.key(),
                                 base.with_family(StreamFamily::poisson).key(),
                                 base.with_sub_index(1).key()};
    EXPECT_EQ(keys.size(), 5u);
}

TEST(Rng, UniformOpenNeverHitsEndpoints) {
    CounterEngine e(RngStream{1, 0, StreamFamily::auxiliary});
    for (int i = 0; i < 100000; ++i) {
        const double u = e.uniform_open();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Paths, SeedDeterminism) {
    const TimeGrid g(1.0, 200);
    for (auto kind : {MartingaleKind::compensated_poisson, MartingaleKind::symmetric_compound_poisson,
                      MartingaleKind::brownian_copy}) {
        const auto a = martingale_path(kind, g, 11, 5);
        const auto b = martingale_path(kind, g, 11, 5);
        ASSERT_EQ(a.levels().size(), b.levels().size());
        for (std::size_t k = 0; k < a.levels().size(); ++k) EXPECT_EQ(a.level(k), b.level(k));
    }
    const auto c = brownian_path(g, 11, 5);
    const auto d = brownian_path(g, 12, 5);
    EXPECT_NE(c.terminal(), d.terminal());
}

TEST(Paths, LevelsAreRunningSums) {
    const TimeGrid g(1.0, 50);
    const auto p = martingale_path(MartingaleKind::compensated_poisson, g, 3, 1);
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_steps(); ++j) {
        s += p.increment(j);
        EXPECT_NEAR(p.level(j + 1), s, 1e-12);
    }
    EXPECT_EQ(p.level(0), 0.0);
}

TEST(Paths, CompensatedPoissonLevelsAreCountMinusTime) {
    const TimeGrid g(2.0, 400);
    const auto p = martingale_path(MartingaleKind::compensated_poisson, g, 17, 2);
    for (std::size_t k = 0; k <= g.n_steps(); ++k) {
        std::size_t count = 0;
        for (const auto& j : p.jumps()) count += j.grid_index <= k ? 1 : 0;
        EXPECT_NEAR(p.level(k), static_cast<double>(count) - g.time(k), 1e-12);
    }
    for (const auto& j : p.jumps()) {
        EXPECT_GE(g.time(j.grid_index), j.arrival - 1e-12);
        EXPECT_EQ(j.mark, 1.0);
    }
}

TEST(Paths, CompoundPoissonMarksAreSigns) {
    const TimeGrid g(1.0, 100);
    std::size_t plus = 0, minus = 0;
    for (std::uint64_t i = 0; i < 2000; ++i) {
        for (const auto& j : martingale_path(MartingaleKind::symmetric_compound_poisson, g, 1, i).jumps()) {
            ASSERT_TRUE(j.mark == 1.0 || j.mark == -1.0);
            (j.mark > 0 ? plus : minus)++;
        }
    }
    const double n = static_cast<double>(plus + minus);
    EXPECT_LE(std::abs(static_cast<double>(plus) - n / 2) / std::sqrt(n / 4), 4.0);
}

// P(N_1 = 0) = e^-1 for a unit-rate Poisson process.
TEST(Paths, PoissonZeroCountProbability) {
    const TimeGrid g(1.0, 100);
    const std::size_t n = 20000;
    const auto zero = column(n, [&](std::size_t i) {
        return martingale_path(MartingaleKind::compensated_poisson, g, 99, i).jumps().empty() ? 1.0 : 0.0;
    });
    const auto m = sample_moments(zero);
    EXPECT_LE(std::abs(m.mean - std::exp(-1.0)) / m.std_error, 4.0);
}

// E[B_s B_t] = min(s, t), and the same for the compensated Poisson martingale.
TEST(Paths, CovarianceIsMinST) {
    const TimeGrid g(1.0, 100);
    const std::size_t n = 40000;
    for (auto kind : {MartingaleKind::compensated_poisson, MartingaleKind::brownian_copy}) {
        const auto prod = column(n, [&](std::size_t i) {
            const auto p = martingale_path(kind, g, 5, i);
            return p.level(30) * p.level(80);
        });
        const auto m = sample_moments(prod);
        EXPECT_LE(std::abs(m.mean - 0.3) / m.std_error, 4.0) << to_string(kind);
    }
    const auto prod = column(n, [&](std::size_t i) {
        const auto p = brownian_path(g, 5, i);
        return p.level(30) * p.level(80);
    });
    const auto m = sample_moments(prod);
    EXPECT_LE(std::abs(m.mean - 0.3) / m.std_error, 4.0);
}

// B and M built from distinct stream families are uncorrelated.
TEST(Paths, BrownianAndMartingaleIndependent) {
    const TimeGrid g(1.0, 50);
    const std::size_t n = 20000;
    std::vector<double> b(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        b[i] = brownian_path(g, 8, i).terminal();
        m[i] = martingale_path(MartingaleKind::brownian_copy, g, 8, i).terminal();
    }
    EXPECT_LE(std::abs(sample_correlation(b, m)), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Paths, RotationIdentity) {
    const TimeGrid g(1.0, 300);
    const auto b = brownian_path(g, 1, 0);
    const auto m = martingale_path(MartingaleKind::symmetric_compound_poisson, g, 1, 0);
    const auto at0 = rotate(b, m, 0.0);
    const auto at90 = rotate(b, m, std::numbers::pi / 2);
    for (std::size_t k = 0; k <= g.n_steps(); ++k) {
        EXPECT_EQ(at0.level(k), b.level(k));
        EXPECT_EQ(at90.level(k), m.level(k));
    }
    for (double th : {0.3, 1.1, -0.7, 2.5}) {
        const auto y = rotate(b, m, th);
        for (std::size_t k = 0; k <= g.n_steps(); ++k) {
            ASSERT_NEAR(y.level(k), std::cos(th) * b.level(k) + std::sin(th) * m.level(k), 1e-12);
        }
        EXPECT_EQ(y.jumps().size(), m.jumps().size());
    }
}

TEST(Paths, AddUnitJump) {
    const TimeGrid g(1.0, 10);
    const auto b = brownian_path(g, 2, 0);
    const auto p = add_unit_jump(b, 0.35, 0.5);  // snaps to t_4
    for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(p.level(k) - b.level(k), k >= 4 ? 0.5 : 0.0, 1e-15);
    EXPECT_NEAR(p.increment(3) - b.increment(3), 0.5, 1e-15);
}

TEST(Paths, CombineRejectsDifferentGrids) {
    EXPECT_THROW(combine(Path(TimeGrid(1.0, 10)), 1.0, Path(TimeGrid(1.0, 11)), 1.0), DimensionError);
}

// Discrete I_2(1 (x) 1) against B is B_T^2 - sum dB^2; against the Hermite
// value B_T^2 - T the mean-square error is 2 T dt, so halving dt halves it.
TEST(Paths, HermiteIdentityWithDtSlope) {
    const auto one = StepFunction::indicator(0.0, 1.0);
    const SimplexKernel k({one, one});
    std::vector<double> mse;
    for (std::size_t steps : {50u, 100u}) {
        const TimeGrid g(1.0, steps);
        const CompiledKernel ck(k, g);
        const std::size_t n = 20000;
        const auto err = column(n, [&](std::size_t i) {
            const auto b = brownian_path(g, 4, i);
            double qv = 0.0;
            for (double d : b.increments()) qv += d * d;
            const double discrete = iterated_integral(ck, b);
            EXPECT_NEAR(discrete, b.terminal() * b.terminal() - qv, 1e-10);
            const double e = discrete - (b.terminal() * b.terminal() - 1.0);
            return e * e;
        });
        const auto m = sample_moments(err);
        EXPECT_LE(std::abs(m.mean - 2.0 * g.dt()) / m.std_error, 4.0);
        mse.push_back(m.mean);
    }
    EXPECT_NEAR(mse[0] / mse[1], 2.0, 0.2);
}

TEST(Paths, StochasticIntegralChecksLength) {
    const TimeGrid g(1.0, 4);
    const auto b = brownian_path(g, 1, 0);
    std::vector<double> h(3, 1.0);
    EXPECT_THROW(stochastic_integral(h, b), DimensionError);
    h.push_back(1.0);
    EXPECT_NEAR(stochastic_integral(h, b), b.terminal(), 1e-14);
}

TEST(MonteCarlo, MapPathsIndependentOfWorkers) {
    auto f = [](std::size_t i) { return brownian_path(TimeGrid(1.0, 20), 3, i).terminal(); };
    const auto a = map_paths(101, 1, f);
    const auto b = map_paths(101, 8, f);
    EXPECT_EQ(a, b);
}

TEST(MonteCarlo, MapPathsRethrows) {
    EXPECT_THROW(map_paths(10, 3,
                           [](std::size_t i) {
                               if (i == 7) throw NumericalBlowup("boom", 1);
                               return 0.0;
                           }),
                 NumericalBlowup);
}

TEST(MonteCarlo, SampleMoments) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto m = sample_moments(xs);
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.std_error, std::sqrt((2.25 * 2 + 0.25 * 2) / 3.0 / 4.0), 1e-15);
}
