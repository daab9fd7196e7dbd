#pragma once

// Spectral masses of the rotation process of an exponential vector:
//   c_n^2 = c_{-n}^2 = sum_k (x/2)^{2k+n} / (k! (n+k)!),   x = ||h||^2,
// i.e. the modified Bessel function I_n(x). They satisfy
//   sum_{n in Z} c_n^2 e^{i n phi} = exp(x cos phi).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lentp/errors.hpp"

namespace lentp {

struct SpectrumReport {
    double h_norm_sq = 0.0;
    std::vector<double> coefficients;  // c_n^2 for n = 0..truncation_n
    std::size_t truncation_n = 0;
    double series_tolerance = 0.0;

    /// c_0^2 + 2 sum_{n>=1} c_n^2.
    [[nodiscard]] double total_mass() const noexcept { return fourier(0.0); }

    /// sum_{|n|<=N} c_n^2 e^{i n phi} = c_0^2 + 2 sum_{n>=1} c_n^2 cos(n phi).
    [[nodiscard]] double fourier(double phi) const noexcept {
        long double sum = 0.0L;
        for (std::size_t n = coefficients.size(); n-- > 1;) {
            sum += 2.0L * static_cast<long double>(coefficients[n]) * std::cos(static_cast<long double>(n) * phi);
        }
        if (!coefficients.empty()) sum += coefficients[0];
        return static_cast<double>(sum);
    }
};

/// One coefficient by term-ratio recursion; stops once past the largest term
/// and the next term is below tol times the running sum. Accumulates in
/// extended precision so that sums of order e^{||h||^2} keep absolute accuracy.
inline double bessel_coefficient(double h_norm_sq, std::size_t n, double tol) {
    using ext = long double;
    const ext x = 0.5L * static_cast<ext>(h_norm_sq);
    if (x == 0.0L) return n == 0 ? 1.0 : 0.0;
    ext term = 1.0L;  // x^n / n!
    for (std::size_t i = 1; i <= n; ++i) term *= x / static_cast<ext>(i);
    ext sum = 0.0L;
    const ext x2 = x * x;
    for (std::size_t k = 0;; ++k) {
        sum += term;
        const ext denom = static_cast<ext>(k + 1) * static_cast<ext>(n + k + 1);
        term *= x2 / denom;
        if (denom > x2 && term < static_cast<ext>(tol) * sum) break;
        if (term == 0.0L) break;
    }
    return static_cast<double>(sum);
}

inline SpectrumReport bessel_spectrum(double h_norm_sq, long n_max, double tol = 1e-17) {
    if (n_max < 0) throw DomainError("bessel spectrum: n_max must be non-negative");
    if (!(h_norm_sq >= 0.0) || !std::isfinite(h_norm_sq)) {
        throw DomainError("bessel spectrum: ||h||^2 must be finite and non-negative");
    }
    if (!(tol > 0.0)) throw DomainError("bessel spectrum: tolerance must be positive");
    SpectrumReport r;
    r.h_norm_sq = h_norm_sq;
    r.truncation_n = static_cast<std::size_t>(n_max);
    r.series_tolerance = tol;
    r.coefficients.reserve(r.truncation_n + 1);
    for (std::size_t n = 0; n <= r.truncation_n; ++n) r.coefficients.push_back(bessel_coefficient(h_norm_sq, n, tol));
    return r;
}

/// Truncation order large enough that the neglected tail is below double
/// resolution of exp(||h||^2).
inline long default_truncation(double h_norm_sq) {
    return static_cast<long>(std::ceil(2.0 * h_norm_sq + 12.0 * std::sqrt(h_norm_sq) + 30.0));
}

}  // namespace lentp
