#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lentp {

/// Value at x = 0 of the polynomial through (xs[i], ys[i]) (Neville's scheme).
/// With xs a geometric sequence of step sizes this is Richardson extrapolation
/// for an error expansion in integer powers of the step.
inline double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("extrapolate_to_zero: bad sample sets");
    std::vector<double> p(ys.begin(), ys.end());
    const std::size_t n = p.size();
    for (std::size_t level = 1; level < n; ++level) {
        for (std::size_t i = 0; i + level < n; ++i) {
            const double xi = xs[i];
            const double xj = xs[i + level];
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    return p[0];
}

/// One Richardson level for a central difference with steps h and h/2: (4 E(h/2) - E(h)) / 3.
inline double richardson_central(double at_h, double at_half_h) noexcept { return (4.0 * at_half_h - at_h) / 3.0; }

}  // namespace lentp
