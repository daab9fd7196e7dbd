#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/time_grid.hpp"

namespace lentp {

/// Piecewise-constant function on right-open intervals [b_i, b_{i+1}); zero
/// outside [b_0, b_m).
class StepFunction {
public:
    StepFunction() = default;

    StepFunction(std::vector<double> breakpoints, std::vector<double> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (breakpoints_.empty() && values_.empty()) return;
        if (breakpoints_.size() != values_.size() + 1) {
            throw ConfigError("step function: need exactly one more breakpoint than values");
        }
        if (breakpoints_.front() < 0.0) {
            throw ConfigError("step function: breakpoints must be non-negative");
        }
        for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
            if (!(breakpoints_[i] < breakpoints_[i + 1])) {
                throw ConfigError("step function: breakpoints must be strictly increasing");
            }
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw ConfigError("step function: non-finite value");
        }
    }

    static StepFunction indicator(double a, double b, double value = 1.0) { return StepFunction({a, b}, {value}); }

    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] bool is_zero() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    [[nodiscard]] double operator()(double t) const noexcept {
        if (values_.empty() || t < breakpoints_.front() || t >= breakpoints_.back()) return 0.0;
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
    }

    /// Values at the left endpoints t_0 .. t_{n-1} of the grid steps.
    [[nodiscard]] std::vector<double> sample_left(const TimeGrid& grid) const {
        std::vector<double> out(grid.n_steps(), 0.0);
        if (values_.empty()) return out;
        std::size_t piece = 0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double t = grid.time(j);
            if (t < breakpoints_.front()) continue;
            while (piece < values_.size() && t >= breakpoints_[piece + 1]) ++piece;
            if (piece >= values_.size()) break;
            out[j] = values_[piece];
        }
        return out;
    }

    [[nodiscard]] double norm_sq() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            s += values_[i] * values_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
        }
        return s;
    }

    [[nodiscard]] double integral() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
        return s;
    }

    friend bool operator==(const StepFunction&, const StepFunction&) = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

/// Sorted union of the breakpoints of several step functions.
inline std::vector<double> merged_breakpoints(std::span<const StepFunction* const> fns) {
    std::vector<double> pts;
    for (const auto* f : fns) pts.insert(pts.end(), f->breakpoints().begin(), f->breakpoints().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Pointwise product, exact on the merged partition.
inline StepFunction product(const StepFunction& f, const StepFunction& g) {
    const StepFunction* both[] = {&f, &g};
    const auto pts = merged_breakpoints(both);
    if (pts.size() < 2) return {};
    std::vector<double> vals(pts.size() - 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) vals[i] = f(pts[i]) * g(pts[i]);
    return {pts, vals};
}

inline double inner_product(const StepFunction& f, const StepFunction& g) {
    const StepFunction* both[] = {&f, &g};
    const auto pts = merged_breakpoints(both);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += f(pts[i]) * g(pts[i]) * (pts[i + 1] - pts[i]);
    return s;
}

/// Exact value of  integral over {0 <= s_1 < ... < s_n}  of  f_1(s_1) ... f_n(s_n) ds.
///
/// F_k(t) = int_0^t f_k(s) F_{k-1}(s) ds is a polynomial of degree k on each
/// piece of the merged partition; it is carried in the local variable t - p_a.
inline double simplex_integral(std::span<const StepFunction> fns) {
    const std::size_t n = fns.size();
    if (n == 0) return 1.0;
    std::vector<const StepFunction*> ptrs;
    for (const auto& f : fns) ptrs.push_back(&f);
    auto pts = merged_breakpoints(ptrs);
    if (pts.empty()) return 0.0;
    if (pts.front() > 0.0) pts.insert(pts.begin(), 0.0);
    const std::size_t pieces = pts.size() - 1;
    if (pieces == 0) return 0.0;

    // coeffs[a] holds F_{k-1} on piece a as polynomial coefficients in (t - p_a).
    std::vector<std::vector<double>> coeffs(pieces, std::vector<double>{1.0});
    for (std::size_t k = 0; k < n; ++k) {
        double start = 0.0;
        for (std::size_t a = 0; a < pieces; ++a) {
            const double c = fns[k](pts[a]);
            const auto& prev = coeffs[a];
            std::vector<double> next(prev.size() + 1, 0.0);
            next[0] = start;
            for (std::size_t d = 0; d < prev.size(); ++d) next[d + 1] = c * prev[d] / static_cast<double>(d + 1);
            const double len = pts[a + 1] - pts[a];
            double value = 0.0;
            for (std::size_t d = next.size(); d-- > 0;) value = value * len + next[d];
            start = value;
            coeffs[a] = std::move(next);
        }
        if (k + 1 == n) return start;
    }
    return 0.0;
}

}  // namespace lentp
