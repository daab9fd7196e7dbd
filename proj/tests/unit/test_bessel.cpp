#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lentp/bessel.hpp"
#include "lentp/errors.hpp"
#include "lentp/extrapolation.hpp"

using namespace lentp;

// c_n^2 is the modified Bessel function I_n(||h||^2). libstdc++ carries
// about 1e-14 relative error here, so it is only a coarse reference.
TEST(Bessel, CoefficientsMatchStdCylBesselI) {
    for (double x : {0.0, 0.5, 1.0, 4.0, 10.0, 30.0}) {
        for (unsigned n : {0u, 1u, 2u, 5u, 12u, 40u}) {
            const double expect = std::cyl_bessel_i(static_cast<double>(n), x);
            EXPECT_NEAR(bessel_coefficient(x, n, 1e-17), expect, 1e-13 * std::max(expect, 1e-300))
                << "x=" << x << " n=" << n;
        }
    }
}

// 40-digit reference values (mpmath besseli).
TEST(Bessel, CoefficientsMatchHighPrecisionReference) {
    struct Ref {
        double x;
        unsigned n;
        double value;
    };
    const Ref refs[] = {
        {1.0, 40, 1.121509741331485958103246522235408342493e-60},
        {4.0, 40, 1.485511059939051140008812044954282744824e-36},
        {10.0, 12, 3.112769776267509174344110482099614390789},
        {10.0, 40, 2.042123273987862065995614492327560861671e-20},
        {30.0, 40, 24.055697639533881298844332646025872681},
        {1.0, 0, 1.266065877752008335598244625214717537608},
        {10.0, 0, 2815.716628466254471469811153426590093078},
    };
    for (const auto& r : refs) {
        EXPECT_NEAR(bessel_coefficient(r.x, r.n, 1e-17), r.value, 2e-16 * r.value) << "x=" << r.x << " n=" << r.n;
    }
}

TEST(Bessel, ParsevalAndFourier) {
    for (double x : {0.5, 1.0, 4.0, 10.0}) {
        const auto s = bessel_spectrum(x, default_truncation(x));
        EXPECT_NEAR(s.total_mass(), std::exp(x), 1e-10);
        for (double phi : {0.0, std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi}) {
            EXPECT_NEAR(s.fourier(phi), std::exp(x * std::cos(phi)), 1e-8 * std::max(1.0, std::exp(x) / 1e4));
        }
    }
}

// The neglected tail 2 sum_{n>N} I_n(x) shrinks faster than geometrically:
// each extra order at least halves the Parseval defect once N > x.
TEST(Bessel, TruncationDefectHalves) {
    const double x = 4.0;
    double previous = INFINITY;
    for (long n = 6; n <= 24; ++n) {
        const double defect = std::exp(x) - bessel_spectrum(x, n).total_mass();
        EXPECT_GT(defect, -1e-12);
        if (defect < 1e-12) break;
        EXPECT_LT(defect, 0.5 * previous) << "N=" << n;
        previous = defect;
    }
}

TEST(Bessel, ZeroNormIsDelta) {
    const auto s = bessel_spectrum(0.0, 5);
    EXPECT_EQ(s.coefficients[0], 1.0);
    for (std::size_t n = 1; n <= 5; ++n) EXPECT_EQ(s.coefficients[n], 0.0);
}

TEST(Bessel, DomainErrors) {
    EXPECT_THROW(bessel_spectrum(-1.0, 5), DomainError);
    EXPECT_THROW(bessel_spectrum(1.0, -1), DomainError);
    EXPECT_THROW(bessel_spectrum(NAN, 5), DomainError);
    EXPECT_THROW(bessel_spectrum(1.0, 5, 0.0), DomainError);
}

TEST(Extrapolation, NevilleIsExactForPolynomials) {
    const std::vector<double> xs{0.1, 0.01, 0.001};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 - 2.0 * x + 5.0 * x * x);
    EXPECT_NEAR(extrapolate_to_zero(xs, ys), 3.0, 1e-12);
    EXPECT_NEAR(richardson_central(3.0 + 4.0, 3.0 + 1.0), 3.0, 1e-15);
}
