#pragma once

// Scalar SDEs dX = sigma(t,X) dW + b(t,X) dt driven by any simulated path,
// the first-variation (flow) process, and Malliavin derivatives D_u X_t by
// lending a jump to the driver.
//
// Convention: a jump lent at u sits on the increment ending at the snapped
// grid point t_k, so it enters the state as a * sigma(t_{k-1}, X_{k-1}), the
// left-endpoint state. The flow oracle uses the same state:
//   D_u X_t = sigma(t_{k-1}, X_{k-1}) * Y_t / Y_{t_k}.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lentp/cylindrical.hpp"
#include "lentp/errors.hpp"
#include "lentp/paths.hpp"

namespace lentp {

using Coefficient = std::function<double(double t, double x)>;

struct SdeSpec {
    std::string name;
    double x0 = 0.0;
    Coefficient sigma;
    Coefficient drift;
    Coefficient sigma_x;
    Coefficient drift_x;
};

using SdeParameters = std::map<std::string, double>;

namespace detail {

inline double param(const SdeParameters& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline void reject_unknown(const SdeParameters& p, std::initializer_list<const char*> known, const std::string& sde) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ConfigError("sde '" + sde + "': unknown parameter '" + k + "'");
        if (!std::isfinite(v)) throw ConfigError("sde '" + sde + "': parameter '" + k + "' is not finite");
    }
}

}  // namespace detail

/// dX = sigma_bar X dB + b_bar X dt.
inline SdeSpec gbm_sde(double sigma_bar, double b_bar, double x0 = 1.0) {
    return {"gbm", x0,
            [sigma_bar](double, double x) { return sigma_bar * x; },
            [b_bar](double, double x) { return b_bar * x; },
            [sigma_bar](double, double) { return sigma_bar; },
            [b_bar](double, double) { return b_bar; }};
}

/// dX = c dB + b dt.
inline SdeSpec additive_sde(double c, double b = 0.0, double x0 = 0.0) {
    return {"additive", x0,
            [c](double, double) { return c; },
            [b](double, double) { return b; },
            [](double, double) { return 0.0; },
            [](double, double) { return 0.0; }};
}

/// dX = (amplitude sin X + offset) dB + b dt.
inline SdeSpec sine_diffusion_sde(double amplitude = 1.0, double offset = 2.0, double b = 0.0, double x0 = 0.0) {
    return {"sine-diffusion", x0,
            [amplitude, offset](double, double x) { return amplitude * std::sin(x) + offset; },
            [b](double, double) { return b; },
            [amplitude](double, double x) { return amplitude * std::cos(x); },
            [](double, double) { return 0.0; }};
}

inline std::vector<std::string> sde_registry_names() { return {"gbm", "additive", "sine-diffusion"}; }

/// Built-in SDEs by name. Unknown names and parameters are configuration errors.
inline SdeSpec make_sde(const std::string& name, const SdeParameters& p = {}) {
    using detail::param;
    if (name == "gbm") {
        detail::reject_unknown(p, {"sigma", "b", "x0"}, name);
        return gbm_sde(param(p, "sigma", 0.3), param(p, "b", 0.1), param(p, "x0", 1.0));
    }
    if (name == "additive") {
        detail::reject_unknown(p, {"c", "b", "x0"}, name);
        return additive_sde(param(p, "c", 0.5), param(p, "b", 0.0), param(p, "x0", 0.0));
    }
    if (name == "sine-diffusion") {
        detail::reject_unknown(p, {"amplitude", "offset", "b", "x0"}, name);
        return sine_diffusion_sde(param(p, "amplitude", 1.0), param(p, "offset", 2.0), param(p, "b", 0.0),
                                  param(p, "x0", 0.0));
    }
    throw ConfigError("unknown sde '" + name + "'");
}

/// Largest relative mismatch between the declared x-derivatives and central
/// finite differences at `samples` random points of [0,T] x [-x_range, x_range].
inline double derivative_consistency(const SdeSpec& spec, double horizon, double x_range, std::size_t samples,
                                     std::uint64_t seed) {
    CounterEngine rng(RngStream{seed, 0, StreamFamily::auxiliary});
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = horizon * rng.uniform_open();
        const double x = x_range * (2.0 * rng.uniform_open() - 1.0);
        const double h = 1e-5 * std::max(1.0, std::abs(x));
        const double fd_s = (spec.sigma(t, x + h) - spec.sigma(t, x - h)) / (2.0 * h);
        const double fd_b = (spec.drift(t, x + h) - spec.drift(t, x - h)) / (2.0 * h);
        const double es = std::abs(fd_s - spec.sigma_x(t, x)) / std::max(1.0, std::abs(spec.sigma_x(t, x)));
        const double eb = std::abs(fd_b - spec.drift_x(t, x)) / std::max(1.0, std::abs(spec.drift_x(t, x)));
        worst = std::max({worst, es, eb});
    }
    return worst;
}

namespace detail {

/// Euler steps j in [from, to) starting from `state`, writing states[j+1].
/// `extra` is added to increment `extra_at` (a lent jump).
inline void euler_steps(const SdeSpec& spec, const Path& driver, std::span<double> states, std::size_t from,
                        std::size_t to, std::size_t extra_at = SIZE_MAX, double extra = 0.0) {
    const auto& grid = driver.grid();
    const auto dw = driver.increments();
    const double dt = grid.dt();
    double x = states[from];
    for (std::size_t j = from; j < to; ++j) {
        const double t = grid.time(j);
        const double dwj = j == extra_at ? dw[j] + extra : dw[j];
        x = x + spec.sigma(t, x) * dwj + spec.drift(t, x) * dt;
        if (!std::isfinite(x)) throw NumericalBlowup("sde '" + spec.name + "': non-finite state", j + 1);
        states[j + 1] = x;
    }
}

}  // namespace detail

/// Left-endpoint (Euler-Maruyama) solution at every grid point.
inline std::vector<double> solve_sde(const SdeSpec& spec, const Path& driver) {
    std::vector<double> states(driver.n_steps() + 1);
    states[0] = spec.x0;
    detail::euler_steps(spec, driver, states, 0, driver.n_steps());
    return states;
}

/// First-variation process Y (Y_0 = 1) along a solved trajectory.
inline std::vector<double> first_variation(const SdeSpec& spec, const Path& driver, std::span<const double> states) {
    const auto& grid = driver.grid();
    const auto dw = driver.increments();
    const double dt = grid.dt();
    std::vector<double> y(states.size());
    y[0] = 1.0;
    for (std::size_t j = 0; j + 1 < states.size(); ++j) {
        const double t = grid.time(j);
        y[j + 1] = y[j] * (1.0 + spec.sigma_x(t, states[j]) * dw[j] + spec.drift_x(t, states[j]) * dt);
        if (!std::isfinite(y[j + 1])) throw NumericalBlowup("first variation: non-finite state", j + 1);
    }
    return y;
}

/// Solution with the jump a * 1_{. >= t_k} added to the driver; only steps from k-1 on are recomputed.
inline std::vector<double> solve_with_lent_jump(const SdeSpec& spec, const Path& driver, std::span<const double> base,
                                                std::size_t grid_index, double a) {
    std::vector<double> states(base.begin(), base.end());
    detail::euler_steps(spec, driver, states, grid_index - 1, driver.n_steps(), grid_index - 1, a);
    return states;
}

struct SdeGradientProfile {
    std::size_t grid_index = 0;  // snapped u
    std::vector<double> values;  // D_u X_{t_m} for m = 0..n (zero before grid_index)
};

/// Central jump difference (X(+theta) - X(-theta)) / 2 theta at every grid point, same driver.
inline SdeGradientProfile lent_particle_profile(const SdeSpec& spec, const Path& driver, std::span<const double> base,
                                                double u, double theta) {
    if (!(theta > 0.0)) throw DomainError("lent particle: theta must be positive");
    SdeGradientProfile out;
    out.grid_index = driver.grid().snap_forward(u);
    const auto up = solve_with_lent_jump(spec, driver, base, out.grid_index, theta);
    const auto down = solve_with_lent_jump(spec, driver, base, out.grid_index, -theta);
    out.values.assign(base.size(), 0.0);
    for (std::size_t m = out.grid_index; m < base.size(); ++m) out.values[m] = (up[m] - down[m]) / (2.0 * theta);
    return out;
}

/// Flow-oracle profile sigma(t_{k-1}, X_{k-1}) Y_{t_m} / Y_{t_k}.
inline SdeGradientProfile flow_oracle_profile(const SdeSpec& spec, const Path& driver, std::span<const double> states,
                                              std::span<const double> flow, double u) {
    SdeGradientProfile out;
    out.grid_index = driver.grid().snap_forward(u);
    const std::size_t k = out.grid_index;
    if (flow[k] == 0.0) throw SingularFlow("flow oracle: first variation vanishes at u");
    const double s = spec.sigma(driver.grid().time(k - 1), states[k - 1]);
    out.values.assign(states.size(), 0.0);
    for (std::size_t m = k; m < states.size(); ++m) out.values[m] = s * flow[m] / flow[k];
    return out;
}

namespace detail {

inline std::size_t check_u_t(const TimeGrid& grid, double u, double t) {
    if (!(u > 0.0) || !(u <= t) || t > grid.horizon() * (1.0 + 1e-12)) {
        throw DomainError("need 0 < u <= t <= T");
    }
    return grid.snap_forward(t);
}

}  // namespace detail

inline GradientEstimate lent_particle_sde(const SdeSpec& spec, const Path& brownian, double u, double t, double theta) {
    const std::size_t m = detail::check_u_t(brownian.grid(), u, t);
    const auto base = solve_sde(spec, brownian);
    const auto prof = lent_particle_profile(spec, brownian, base, u, theta);
    return {brownian.grid().time(prof.grid_index), brownian.grid().time(m), prof.values[m],
            GradientMethod::jump_difference, theta};
}

inline GradientEstimate flow_oracle(const SdeSpec& spec, const Path& brownian, double u, double t) {
    const std::size_t m = detail::check_u_t(brownian.grid(), u, t);
    const auto states = solve_sde(spec, brownian);
    const auto flow = first_variation(spec, brownian, states);
    const auto prof = flow_oracle_profile(spec, brownian, states, flow, u);
    return {brownian.grid().time(prof.grid_index), brownian.grid().time(m), prof.values[m],
            GradientMethod::flow_oracle, 0.0};
}

struct PoissonGradient {
    GradientEstimate estimate;   // d/dtheta X_t along B cos(theta) + M sin(theta), at theta = 0
    double mark = 0.0;           // J_1
    double debiased = 0.0;       // J_1 * estimate, an estimate of D_{U_1} X_t
    std::size_t jump_index = 0;  // grid point of U_1
    bool skipped = false;        // u_from_jump requested but the path does not have exactly one jump
};

/// Lent particle through a rotation with an independent pure-jump martingale.
/// With a single jump (U_1, J_1) the theta-derivative is J_1 D_{U_1} X_t, so
/// J_1 times the estimate recovers D_{U_1} X_t.
inline PoissonGradient lent_particle_sde_poisson(const SdeSpec& spec, const Path& brownian, const Path& martingale,
                                                 bool u_from_jump, double theta, double t) {
    if (!(theta > 0.0)) throw DomainError("lent particle: theta must be positive");
    const auto& grid = brownian.grid();
    const std::size_t m = grid.snap_forward(t);
    PoissonGradient out;
    const auto& jumps = martingale.jumps();
    if (u_from_jump && jumps.size() != 1) {
        out.skipped = true;
        return out;
    }
    const auto up = solve_sde(spec, rotate(brownian, martingale, theta));
    const auto down = solve_sde(spec, rotate(brownian, martingale, -theta));
    const double d = (up[m] - down[m]) / (2.0 * theta);
    double u = 0.0;
    if (!jumps.empty()) {
        out.jump_index = jumps.front().grid_index;
        out.mark = jumps.front().mark;
        u = grid.time(out.jump_index);
    }
    out.estimate = {u, grid.time(m), d, GradientMethod::jump_difference, theta};
    out.debiased = out.mark * d;
    return out;
}

}  // namespace lentp
