#pragma once

// Chaos vectors, chaotic extensions F -> F^theta, exponential vectors and the
// rotation covariance curve.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/kernel.hpp"
#include "lentp/monte_carlo.hpp"
#include "lentp/paths.hpp"

namespace lentp {

/// F = constant + sum_a I_{n_a}(f_a): a finite chaos expansion.
class ChaosVector {
public:
    ChaosVector() = default;
    explicit ChaosVector(double constant, std::vector<SimplexKernel> terms = {})
        : constant_(constant), terms_(std::move(terms)) {
        for (const auto& t : terms_) {
            if (t.order() == 0) throw ConfigError("chaos vector: order-0 terms belong in the constant");
        }
    }

    [[nodiscard]] double constant() const noexcept { return constant_; }
    [[nodiscard]] const std::vector<SimplexKernel>& terms() const noexcept { return terms_; }

    /// ||f_n||^2 of the order-n kernel (sum of the order-n terms).
    [[nodiscard]] double kernel_norm_sq(std::size_t n) const {
        double s = 0.0;
        for (const auto& a : terms_) {
            if (a.order() != n) continue;
            for (const auto& b : terms_) {
                if (b.order() == n) s += inner_product(a, b);
            }
        }
        return s;
    }

    [[nodiscard]] std::vector<std::size_t> orders() const {
        std::vector<std::size_t> out;
        for (const auto& t : terms_) out.push_back(t.order());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// E[F^2] = f(empty)^2 + sum_n n! ||f_n||^2.
    [[nodiscard]] double norm_sq() const {
        double s = constant_ * constant_;
        for (auto n : orders()) s += factorial(n) * kernel_norm_sq(n);
        return s;
    }

    /// sum_n n n! ||f_n||^2, the Ornstein-Uhlenbeck energy E[Gamma[F]] = 2 E(F).
    [[nodiscard]] double energy() const {
        double s = 0.0;
        for (auto n : orders()) s += static_cast<double>(n) * factorial(n) * kernel_norm_sq(n);
        return s;
    }

private:
    double constant_ = 0.0;
    std::vector<SimplexKernel> terms_;
};

/// ChaosVector with every kernel compiled for one grid.
class CompiledChaos {
public:
    CompiledChaos(const ChaosVector& f, const TimeGrid& grid) : grid_(grid), constant_(f.constant()) {
        for (const auto& t : f.terms()) kernels_.emplace_back(t, grid);
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }

    /// F evaluated by iterated integrals against `driver`.
    [[nodiscard]] double operator()(const Path& driver) const {
        double s = constant_;
        for (const auto& k : kernels_) s += iterated_integral(k, driver);
        return s;
    }

    /// Discrete D_{t_j}F for every increment j.
    [[nodiscard]] std::vector<double> derivative_profile(const Path& driver) const {
        std::vector<double> out(driver.n_steps(), 0.0);
        for (const auto& k : kernels_) {
            const auto d = lentp::derivative_profile(k, driver);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += d[j];
        }
        return out;
    }

    /// F^theta: the same kernels integrated against B cos(theta) + M sin(theta).
    [[nodiscard]] double extension(const Path& brownian, const Path& martingale, double theta) const {
        return (*this)(rotate(brownian, martingale, theta));
    }

private:
    TimeGrid grid_;
    double constant_;
    std::vector<CompiledKernel> kernels_;
};

inline double chaotic_extension(const ChaosVector& f, const Path& brownian, const Path& martingale, double theta) {
    return CompiledChaos(f, brownian.grid()).extension(brownian, martingale, theta);
}

struct ExponentialValue {
    double value = 1.0;
    bool zero_factor = false;  // some (1 + dV_s) vanished
};

/// Exponential vector E_t^theta(h1, h2) = exp(V_t - [V,V]^c_t / 2) prod_{s<=t} (1 + dV_s) exp(-dV_s),
/// V = int h1 dY^theta + int h2 dY^{theta + pi/2},  Y^theta = B cos(theta) + M sin(theta).
/// Only B contributes to [V,V]^c unless M is itself continuous (a Brownian copy).
class ExponentialVector {
public:
    ExponentialVector(const StepFunction& h1, const StepFunction& h2, const TimeGrid& grid,
                      MartingaleKind kind = MartingaleKind::compensated_poisson)
        : grid_(grid), h1_(h1.sample_left(grid)), h2_(h2.sample_left(grid)), kind_(kind) {}

    [[nodiscard]] ExponentialValue evaluate(const Path& brownian, const Path& martingale, double theta,
                                            std::size_t grid_index) const {
        if (!(brownian.grid() == grid_) || !(martingale.grid() == grid_)) {
            throw DimensionError("exponential vector: path grid mismatch");
        }
        const auto [c, s] = rotation_coefficients(theta);
        const auto db = brownian.increments();
        const auto dm = martingale.increments();
        const double dt = grid_.dt();
        double v = 0.0;
        double bracket = 0.0;
        const bool continuous_m = kind_ == MartingaleKind::brownian_copy;
        for (std::size_t j = 0; j < grid_index; ++j) {
            const double kb = h1_[j] * c - h2_[j] * s;
            const double km = h1_[j] * s + h2_[j] * c;
            v += kb * db[j] + km * dm[j];
            bracket += kb * kb * dt;
            if (continuous_m) bracket += km * km * dt;
        }
        ExponentialValue out;
        double log_part = v - 0.5 * bracket;
        double jump_factor = 1.0;
        for (const auto& jump : martingale.jumps()) {
            if (jump.grid_index > grid_index) continue;
            const std::size_t j = jump.grid_index - 1;
            const double dv = (h1_[j] * s + h2_[j] * c) * jump.mark;
            const double factor = 1.0 + dv;
            if (factor == 0.0) out.zero_factor = true;
            jump_factor *= factor;
            log_part -= dv;
        }
        out.value = std::exp(log_part) * jump_factor;
        return out;
    }

    [[nodiscard]] ExponentialValue evaluate(const Path& brownian, const Path& martingale, double theta) const {
        return evaluate(brownian, martingale, theta, grid_.n_steps());
    }

    /// Terminal value, so that the class can stand in for a functional F^theta.
    [[nodiscard]] double extension(const Path& brownian, const Path& martingale, double theta) const {
        return evaluate(brownian, martingale, theta).value;
    }

private:
    TimeGrid grid_;
    std::vector<double> h1_;
    std::vector<double> h2_;
    MartingaleKind kind_;
};

inline ExponentialValue exponential_vector(const StepFunction& h1, const StepFunction& h2, const Path& brownian,
                                           const Path& martingale, double theta, double t,
                                           MartingaleKind kind = MartingaleKind::compensated_poisson) {
    const auto& grid = brownian.grid();
    if (t == 0.0) return {};
    if (!grid.on_grid(t)) throw DomainError("exponential vector: t must be a grid point");
    return ExponentialVector(h1, h2, grid, kind).evaluate(brownian, martingale, theta, grid.snap_forward(t));
}

/// Anything that can be re-read along a rotation of (B, M).
template <class F>
concept RotationFunctional = requires(const F& f, const Path& b, const Path& m, double theta) {
    { f.extension(b, m, theta) } -> std::convertible_to<double>;
};

struct CovariancePoint {
    double phi = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
};

struct CovarianceConfig {
    TimeGrid grid{1.0, 1000};
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    MartingaleKind martingale = MartingaleKind::compensated_poisson;
    double theta0 = 0.0;
    unsigned workers = 1;
};

/// Monte Carlo estimate of phi -> E[F^{theta0 + phi} F^{theta0}].
template <RotationFunctional F>
std::vector<CovariancePoint> covariance_curve(const F& f, const std::vector<double>& phis, const CovarianceConfig& cfg) {
    if (cfg.n_paths < 2) throw ConfigError("covariance curve: need at least two paths");
    const std::size_t m = phis.size();
    auto rows = map_paths(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        const Path b = brownian_path(cfg.grid, cfg.seed, i);
        const Path mart = martingale_path(cfg.martingale, cfg.grid, cfg.seed, i);
        const double base = f.extension(b, mart, cfg.theta0);
        std::vector<double> row(m);
        for (std::size_t a = 0; a < m; ++a) row[a] = f.extension(b, mart, cfg.theta0 + phis[a]) * base;
        return row;
    });
    std::vector<CovariancePoint> out;
    std::vector<double> col(cfg.n_paths);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t i = 0; i < cfg.n_paths; ++i) col[i] = rows[i][a];
        const auto mom = sample_moments(col);
        out.push_back({phis[a], mom.mean, mom.std_error});
    }
    return out;
}

}  // namespace lentp
