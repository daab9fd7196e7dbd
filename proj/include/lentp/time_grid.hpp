#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "lentp/errors.hpp"

namespace lentp {

/// Uniform discretization t_k = k * dt of [0, T].
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw ConfigError("time grid: horizon must be positive and finite, got " + std::to_string(horizon));
        }
        if (n_steps == 0) {
            throw ConfigError("time grid: n_steps must be at least 1");
        }
        dt_ = horizon_ / static_cast<double>(n_steps_);
    }

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return n_steps_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }

    /// t_k; the last point is T exactly.
    [[nodiscard]] double time(std::size_t k) const noexcept {
        return k >= n_steps_ ? horizon_ : static_cast<double>(k) * dt_;
    }

    /// Smallest grid index k >= 1 with t_k >= u. Times within 1e-9 relative of
    /// a grid point count as that grid point.
    [[nodiscard]] std::size_t snap_forward(double u) const {
        if (!(u > 0.0) || u > horizon_ * (1.0 + 1e-12)) {
            throw DomainError("time " + std::to_string(u) + " outside (0, " + std::to_string(horizon_) + "]");
        }
        const double r = u / dt_;
        const double nearest = std::round(r);
        std::size_t k = std::abs(r - nearest) <= 1e-9 * std::max(1.0, r)
                            ? static_cast<std::size_t>(nearest)
                            : static_cast<std::size_t>(std::ceil(r));
        if (k == 0) k = 1;
        if (k > n_steps_) k = n_steps_;
        return k;
    }

    /// Whether u lies on the grid (up to the same 1e-9 relative tolerance).
    [[nodiscard]] bool on_grid(double u) const noexcept {
        const double r = u / dt_;
        return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
        return a.horizon_ == b.horizon_ && a.n_steps_ == b.n_steps_;
    }

private:
    double horizon_;
    std::size_t n_steps_;
    double dt_ = 0.0;
};

}  // namespace lentp
