#pragma once

// Cylindrical functionals F = Phi(I_{k_1}(f_1), ..., I_{k_m}(f_m)) of the
// Brownian path and their gradients, by the chain rule and by lending a jump
// to the path.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/kernel.hpp"
#include "lentp/paths.hpp"

namespace lentp {

enum class GradientMethod { jump_difference, flow_oracle, analytic };

inline const char* to_string(GradientMethod m) noexcept {
    switch (m) {
        case GradientMethod::jump_difference: return "jump_difference";
        case GradientMethod::flow_oracle: return "flow_oracle";
        case GradientMethod::analytic: return "analytic";
    }
    return "?";
}

/// One estimate of D_u F (or D_u X_t).
struct GradientEstimate {
    double u = 0.0;
    double t = 0.0;
    double value = 0.0;
    GradientMethod method = GradientMethod::analytic;
    double theta = 0.0;  // difference step, 0 when not applicable
};

struct CylindricalFunctional {
    /// Order-1 features are the Wiener integrals int h dB; higher orders are iterated integrals.
    std::vector<SimplexKernel> features;
    std::function<double(std::span<const double>)> phi;
    std::function<void(std::span<const double>, std::span<double>)> phi_grad;
    bool c1_lipschitz = true;

    static CylindricalFunctional of_wiener_integrals(const std::vector<StepFunction>& hs,
                                                     std::function<double(std::span<const double>)> phi,
                                                     std::function<void(std::span<const double>, std::span<double>)> grad) {
        CylindricalFunctional f;
        for (const auto& h : hs) f.features.emplace_back(std::vector<StepFunction>{h});
        f.phi = std::move(phi);
        f.phi_grad = std::move(grad);
        return f;
    }
};

class CompiledCylindrical {
public:
    CompiledCylindrical(const CylindricalFunctional& f, const TimeGrid& grid) : grid_(grid), phi_(f.phi), grad_(f.phi_grad) {
        if (!phi_) throw ConfigError("cylindrical functional: missing phi");
        for (const auto& k : f.features) features_.emplace_back(k, grid);
    }

    [[nodiscard]] std::size_t arity() const noexcept { return features_.size(); }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }

    [[nodiscard]] std::vector<double> feature_values(const Path& path) const {
        std::vector<double> v(features_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = iterated_integral(features_[i], path);
        return v;
    }

    [[nodiscard]] double operator()(const Path& path) const { return phi_(feature_values(path)); }

    /// Chain rule: D_{t_j}F = sum_i Phi'_i * D_{t_j} I(f_i) for every increment j.
    [[nodiscard]] std::vector<double> derivative_profile(const Path& path) const {
        if (!grad_) throw ConfigError("cylindrical functional: missing gradient of phi");
        const auto v = feature_values(path);
        std::vector<double> g(v.size());
        grad_(v, g);
        std::vector<double> out(path.n_steps(), 0.0);
        for (std::size_t i = 0; i < features_.size(); ++i) {
            if (g[i] == 0.0) continue;
            const auto d = lentp::derivative_profile(features_[i], path);
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += g[i] * d[j];
        }
        return out;
    }

private:
    TimeGrid grid_;
    std::function<double(std::span<const double>)> phi_;
    std::function<void(std::span<const double>, std::span<double>)> grad_;
    std::vector<CompiledKernel> features_;
};

struct CylindricalGradient {
    GradientEstimate analytic;
    GradientEstimate jump;
    std::size_t grid_index = 0;  // grid point carrying the lent jump
    bool snapped = false;        // u was moved forward onto the grid
};

/// D_u F by the chain rule and by the central jump difference
/// (F(w + a 1_{.>=u}) - F(w - a 1_{.>=u})) / 2a. The jump sits on the step
/// ending at the snapped u, so the analytic value uses the integrands at that
/// step's left endpoint.
inline CylindricalGradient gradient_cylindrical(const CompiledCylindrical& f, const Path& path, double u,
                                                double a0 = 1e-4) {
    if (!(a0 > 0.0)) throw DomainError("jump size must be positive");
    const auto& grid = path.grid();
    CylindricalGradient out;
    out.grid_index = grid.snap_forward(u);
    out.snapped = !grid.on_grid(u);
    const double u_grid = grid.time(out.grid_index);
    const auto profile = f.derivative_profile(path);
    out.analytic = {u_grid, grid.horizon(), profile[out.grid_index - 1], GradientMethod::analytic, 0.0};
    const double up = f(add_unit_jump(path, u_grid, a0));
    const double down = f(add_unit_jump(path, u_grid, -a0));
    out.jump = {u_grid, grid.horizon(), (up - down) / (2.0 * a0), GradientMethod::jump_difference, a0};
    return out;
}

inline CylindricalGradient gradient_cylindrical(const CylindricalFunctional& f, const Path& path, double u,
                                                double a0 = 1e-4) {
    return gradient_cylindrical(CompiledCylindrical(f, path.grid()), path, u, a0);
}

}  // namespace lentp
