#pragma once

// Gradients of chaos vectors by rotation into an independent martingale, the
// integration-by-parts duality, and the running-supremum example.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "lentp/chaos.hpp"
#include "lentp/cylindrical.hpp"
#include "lentp/errors.hpp"
#include "lentp/monte_carlo.hpp"
#include "lentp/paths.hpp"
#include "lentp/sde.hpp"

namespace lentp {

/// F^sharp by the central rotation difference (F^{theta0} - F^{-theta0}) / (2 theta0).
inline double gradient_chaos(const CompiledChaos& f, const Path& brownian, const Path& martingale, double theta0) {
    if (!(theta0 > 0.0)) throw DomainError("gradient_chaos: theta must be positive");
    return (f.extension(brownian, martingale, theta0) - f.extension(brownian, martingale, -theta0)) / (2.0 * theta0);
}

inline double gradient_chaos(const ChaosVector& f, const Path& brownian, const Path& martingale, double theta0) {
    return gradient_chaos(CompiledChaos(f, brownian.grid()), brownian, martingale, theta0);
}

/// sum_j D_{t_j}F dM_j with the discrete derivative profile of F along B.
inline double gradient_integral(const CompiledChaos& f, const Path& brownian, const Path& martingale) {
    const auto d = f.derivative_profile(brownian);
    return stochastic_integral(d, martingale);
}

/// int D_s F dM_s with D_s I_n(sym g_1..g_n) = sum_i g_i(s) I_{n-1}(sym of the other factors):
/// slicing a symmetrized elementary tensor gives elementary tensors again.
inline double contraction_integral(const ChaosVector& f, const Path& brownian, const Path& martingale) {
    const auto& grid = brownian.grid();
    double total = 0.0;
    for (const auto& term : f.terms()) {
        if (term.form() == KernelForm::simplex && !term.all_factors_equal()) {
            throw ConfigError("contraction_integral: simplex-form kernels with distinct factors are not closed under slicing");
        }
        const auto& g = term.factors();
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::vector<StepFunction> rest;
            for (std::size_t j = 0; j < g.size(); ++j)
                if (j != i) rest.push_back(g[j]);
            const SimplexKernel reduced(std::move(rest), term.weight());
            const double lower = iterated_integral(CompiledKernel(reduced, grid), brownian);
            total += lower * stochastic_integral(g[i].sample_left(grid), martingale);
        }
    }
    return total;
}

struct IbpResult {
    double lhs = 0.0;  // E[F int G dB]
    double rhs = 0.0;  // E[int D_u F G_u du]
    double pooled_std_error = 0.0;
    double lhs_std_error = 0.0;
    double rhs_std_error = 0.0;
    std::size_t n_paths = 0;

    [[nodiscard]] bool holds(double n_se = 4.0) const noexcept {
        return std::abs(lhs - rhs) <= n_se * pooled_std_error;
    }
};

struct IbpConfig {
    TimeGrid grid{1.0, 1000};
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Duality check E[F int G dB] = E[int D_u F G_u du] for deterministic step G.
/// Both sides are computed on the same paths; the pooled standard error is that
/// of the per-path difference.
inline IbpResult integration_by_parts_check(const ChaosVector& f, const StepFunction& g, const IbpConfig& cfg) {
    const CompiledChaos cf(f, cfg.grid);
    const auto gs = g.sample_left(cfg.grid);
    const double dt = cfg.grid.dt();
    struct Row {
        double lhs = 0.0, rhs = 0.0;
    };
    const auto rows = map_paths(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        const Path b = brownian_path(cfg.grid, cfg.seed, i);
        Row r;
        r.lhs = cf(b) * stochastic_integral(gs, b);
        const auto d = cf.derivative_profile(b);
        for (std::size_t j = 0; j < d.size(); ++j) r.rhs += d[j] * gs[j] * dt;
        return r;
    });
    std::vector<double> l(rows.size()), r(rows.size()), diff(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        l[i] = rows[i].lhs;
        r[i] = rows[i].rhs;
        diff[i] = l[i] - r[i];
    }
    const auto ml = sample_moments(l);
    const auto mr = sample_moments(r);
    IbpResult out;
    out.lhs = ml.mean;
    out.rhs = mr.mean;
    out.lhs_std_error = ml.std_error;
    out.rhs_std_error = mr.std_error;
    out.pooled_std_error = sample_moments(diff).std_error;
    out.n_paths = rows.size();
    return out;
}

struct SupremumGradient {
    double value = 0.0;
    bool tie = false;          // partial suprema closer than |a|: quotient not on its 0/1 plateau
    double sup_before = 0.0;   // max over grid points before u of B + K
    double sup_after = 0.0;    // max over grid points from u on
};

/// (M(B + a 1_{.>=u}) - M(B)) / a for M(B) = max over grid points t_k <= T of B_{t_k} + K_{t_k}.
inline SupremumGradient supremum_gradient(const Path& k_path, const Path& brownian, double u, double a) {
    if (!(k_path.grid() == brownian.grid())) throw DimensionError("supremum: K and B on different grids");
    if (a == 0.0) throw DomainError("supremum: jump size must be non-zero");
    const std::size_t idx = brownian.grid().snap_forward(u);
    const auto bl = brownian.levels();
    const auto kl = k_path.levels();
    SupremumGradient out;
    out.sup_before = -INFINITY;
    out.sup_after = -INFINITY;
    for (std::size_t i = 0; i < bl.size(); ++i) {
        const double v = bl[i] + kl[i];
        if (i < idx) out.sup_before = std::max(out.sup_before, v);
        else out.sup_after = std::max(out.sup_after, v);
    }
    const double m0 = std::max(out.sup_before, out.sup_after);
    const Path bumped = add_unit_jump(brownian, u, a);
    const auto pl = bumped.levels();
    double m1 = -INFINITY;
    for (std::size_t i = 0; i < pl.size(); ++i) m1 = std::max(m1, pl[i] + kl[i]);
    out.value = (m1 - m0) / a;
    out.tie = std::abs(out.sup_after - out.sup_before) <= std::abs(a);
    return out;
}

}  // namespace lentp
