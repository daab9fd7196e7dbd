#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lentp/lentp.hpp"

using namespace lentp;

namespace {

StepFunction unit_h() { return StepFunction({0.0, 0.5, 1.0}, {1.2, std::sqrt(0.56)}); }
StepFunction g_ref() { return StepFunction({0.0, 0.25, 1.0}, {-0.5, 1.0}); }

// Gauss-Hermite rule for the standard normal weight, by Newton iteration on
// the orthonormal Hermite recursion.
struct GaussHermite {
    std::vector<double> x, w;
    explicit GaussHermite(int n) {
        const double pim4 = std::pow(std::numbers::pi, -0.25);
        std::vector<double> z(n), wz(n);
        double root = 0.0;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            if (i == 0) root = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -1.0 / 6);
            else if (i == 1) root -= 1.14 * std::pow(n, 0.426) / root;
            else if (i == 2) root = 1.86 * root - 0.86 * z[0];
            else if (i == 3) root = 1.91 * root - 0.91 * z[1];
            else root = 2.0 * root - z[i - 2];
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = pim4, p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = root * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
                }
                pp = std::sqrt(2.0 * n) * p2;
                const double prev = root;
                root = prev - p1 / pp;
                if (std::abs(root - prev) < 1e-15) break;
            }
            z[i] = root;
            z[n - 1 - i] = -root;
            wz[i] = wz[n - 1 - i] = 2.0 / (pp * pp);
        }
        for (int i = 0; i < n; ++i) {
            x.push_back(std::sqrt(2.0) * z[i]);
            w.push_back(wz[i] / std::sqrt(std::numbers::pi));
        }
    }
};

// E[f(X, Z)] for standard normals with correlation rho.
template <class F>
double gaussian_pair_expectation(double rho, F&& f) {
    static const GaussHermite gh(40);
    double s = 0.0;
    for (std::size_t i = 0; i < gh.x.size(); ++i)
        for (std::size_t j = 0; j < gh.x.size(); ++j) {
            const double x = gh.x[i];
            const double z = rho * x + std::sqrt(1.0 - rho * rho) * gh.x[j];
            s += gh.w[i] * gh.w[j] * f(x, z);
        }
    return s;
}

}  // namespace

TEST(GaussHermite, Moments) {
    EXPECT_NEAR(gaussian_pair_expectation(0.3, [](double x, double) { return x * x; }), 1.0, 1e-12);
    EXPECT_NEAR(gaussian_pair_expectation(0.3, [](double x, double z) { return x * z; }), 0.3, 1e-12);
    EXPECT_NEAR(gaussian_pair_expectation(0.0, [](double x, double) { return std::cos(x); }), std::exp(-0.5), 1e-12);
}

TEST(Cylindrical, AnalyticMatchesJumpDifference) {
    const TimeGrid g(1.0, 1000);
    const auto f = CylindricalFunctional::of_wiener_integrals(
        {unit_h(), g_ref()}, [](std::span<const double> v) { return std::sin(v[0]) * v[1] + v[1] * v[1]; },
        [](std::span<const double> v, std::span<double> out) {
            out[0] = std::cos(v[0]) * v[1];
            out[1] = std::sin(v[0]) + 2 * v[1];
        });
    const CompiledCylindrical cf(f, g);
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto b = brownian_path(g, 7, i);
        for (double u : {0.1, 0.25, 0.6, 0.3337}) {
            const auto r = gradient_cylindrical(cf, b, u);
            EXPECT_NEAR(r.jump.value, r.analytic.value, 1e-6 * (1 + std::abs(r.analytic.value)));
            EXPECT_EQ(r.snapped, u == 0.3337);
            // closed form: Phi_1' h(u) + Phi_2' g(u), integrands at the left endpoint
            const auto v = cf.feature_values(b);
            const double uu = g.time(r.grid_index - 1);
            const double expect = std::cos(v[0]) * v[1] * unit_h()(uu) + (std::sin(v[0]) + 2 * v[1]) * g_ref()(uu);
            EXPECT_NEAR(r.analytic.value, expect, 1e-12);
        }
    }
}

TEST(Cylindrical, MissingPhiRejected) {
    CylindricalFunctional f;
    EXPECT_THROW(CompiledCylindrical(f, TimeGrid(1.0, 10)), ConfigError);
}

// Duality with F = sin(int h dB), G = g: both sides against Gauss-Hermite
// quadrature of E[sin(X) Z] = <h,g> E[cos X].
TEST(IntegrationByParts, CylindricalAgainstQuadrature) {
    const TimeGrid g(1.0, 200);
    const auto h = unit_h();
    const auto gg = g_ref();
    const double gnorm = std::sqrt(gg.norm_sq());
    const double rho = inner_product(h, gg) / gnorm;
    const double oracle = gnorm * gaussian_pair_expectation(rho, [](double x, double z) { return std::sin(x) * z; });
    EXPECT_NEAR(oracle, inner_product(h, gg) * std::exp(-0.5), 1e-12);

    const auto f = CylindricalFunctional::of_wiener_integrals(
        {h}, [](std::span<const double> v) { return std::sin(v[0]); },
        [](std::span<const double> v, std::span<double> out) { out[0] = std::cos(v[0]); });
    const CompiledCylindrical cf(f, g);
    const auto gs = gg.sample_left(g);
    const std::size_t n = 40000;
    std::vector<double> lhs(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = brownian_path(g, 21, i);
        lhs[i] = cf(b) * stochastic_integral(gs, b);
        const auto d = cf.derivative_profile(b);
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * gs[j] * g.dt();
        rhs[i] = s;
    }
    const auto ml = sample_moments(lhs);
    const auto mr = sample_moments(rhs);
    EXPECT_LE(std::abs(ml.mean - oracle) / ml.std_error, 4.0);
    EXPECT_LE(std::abs(mr.mean - oracle) / mr.std_error, 4.0);
}

// (int h dB)^2 with G = 1: zero by parity, confirmed by quadrature.
TEST(IntegrationByParts, RegisteredPairs) {
    const TimeGrid g(1.0, 200);
    const auto h = unit_h();
    const auto one = StepFunction::indicator(0.0, 1.0);
    const double rho = h.integral();
    EXPECT_NEAR(gaussian_pair_expectation(rho, [](double x, double z) { return x * x * z; }), 0.0, 1e-12);

    const IbpConfig cfg{g, 20000, 5, 1};
    const auto r1 = integration_by_parts_check(ChaosVector(0.0, {SimplexKernel({one})}), one, cfg);
    EXPECT_TRUE(r1.holds());
    EXPECT_LE(std::abs(r1.rhs - 1.0), 1e-12);  // D_u B_T = 1
    const auto r3 = integration_by_parts_check(ChaosVector(1.0, {SimplexKernel::power(h, 2)}), one, cfg);
    EXPECT_TRUE(r3.holds());
    EXPECT_LE(std::abs(r3.lhs) / r3.lhs_std_error, 4.0);
    // a non-zero target: F = I_1(h) + I_2(h h), G = g gives <h, g>
    const auto r4 = integration_by_parts_check(
        ChaosVector(0.0, {SimplexKernel({h}), SimplexKernel::power(h, 2)}), g_ref(), cfg);
    EXPECT_TRUE(r4.holds());
    EXPECT_LE(std::abs(r4.rhs - inner_product(h, g_ref())) / r4.rhs_std_error, 4.0);
}

TEST(Supremum, QuotientIsZeroOrOne) {
    const TimeGrid g(1.0, 500);
    std::size_t ones = 0, counted = 0;
    for (std::uint64_t i = 0; i < 4000; ++i) {
        const auto b = brownian_path(g, 13, i);
        const auto r = supremum_gradient(Path(g), b, 0.5, 1e-4);
        if (r.tie) continue;
        ++counted;
        ASSERT_TRUE(std::abs(r.value) < 1e-9 || std::abs(r.value - 1.0) < 1e-9) << r.value;
        // indicator that the argmax lies after u
        EXPECT_EQ(r.value > 0.5, r.sup_after > r.sup_before);
        ones += r.value > 0.5 ? 1 : 0;
    }
    // arcsine law: P(argmax >= 1/2) = 1/2
    const double p = static_cast<double>(ones) / counted;
    EXPECT_LE(std::abs(p - 0.5) / std::sqrt(0.25 / counted), 4.0);
}

TEST(Supremum, WithPoissonDriftStaysOnPlateau) {
    const TimeGrid g(1.0, 500);
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto b = brownian_path(g, 2, i);
        const auto k = martingale_path(MartingaleKind::compensated_poisson, g, 2, i);
        const auto r = supremum_gradient(k, b, 0.3, 1e-4);
        if (!r.tie) {
            ASSERT_TRUE(std::abs(r.value) < 1e-9 || std::abs(r.value - 1.0) < 1e-9);
        }
    }
}

TEST(Supremum, Errors) {
    const TimeGrid g(1.0, 10);
    EXPECT_THROW(supremum_gradient(Path(TimeGrid(1.0, 11)), Path(g), 0.5, 1e-4), DimensionError);
    EXPECT_THROW(supremum_gradient(Path(g), Path(g), 0.5, 0.0), DomainError);
}
