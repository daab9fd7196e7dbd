#pragma once

// Ornstein-Uhlenbeck structure through an independent Brownian copy B-hat:
//   P_t F(B)  = E-hat[F(e^{-t/2} B + sqrt(1 - e^{-t}) B-hat)]
//   F'        = d/dtheta F(B cos(theta) + B-hat sin(theta)) at 0
//   Gamma[F]  = E-hat[(F')^2]
//             = lim_{t->0} (P_t(F^2) - 2 F P_t F + F^2) / t
// For every outer path the inner level averages over B-hat streams keyed
// (seed, outer index, inner index).

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/extrapolation.hpp"
#include "lentp/monte_carlo.hpp"
#include "lentp/paths.hpp"

namespace lentp {

template <class F>
concept BrownianFunctional = requires(const F& f, const Path& p) {
    { f(p) } -> std::convertible_to<double>;
};

/// Inner B-hat samples attached to one outer path.
struct InnerStreams {
    std::uint64_t seed = 1;
    std::uint64_t outer_index = 0;
    std::size_t count = 1000;
    bool antithetic = false;  // pair each B-hat with -B-hat

    [[nodiscard]] Path path(const TimeGrid& grid, std::size_t j) const {
        const std::size_t draw = antithetic ? j / 2 : j;
        Path p = simulate_brownian(grid, RngStream{seed, outer_index, StreamFamily::inner, draw});
        if (antithetic && (j % 2 == 1)) return combine(p, -1.0, p, 0.0);
        return p;
    }
};

struct InnerEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

namespace detail {

inline InnerEstimate inner_moments(const std::vector<double>& xs, bool antithetic) {
    if (!antithetic || xs.size() < 4) {
        const auto m = sample_moments(xs);
        return {m.mean, m.std_error};
    }
    // antithetic pairs are the independent units
    std::vector<double> pairs(xs.size() / 2);
    for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = 0.5 * (xs[2 * i] + xs[2 * i + 1]);
    const auto m = sample_moments(pairs);
    return {m.mean, m.std_error};
}

inline void check_inner(const InnerStreams& s) {
    if (s.count == 0) throw ConfigError("inner streams: count must be at least 1");
    if (s.antithetic && s.count % 2 != 0) throw ConfigError("inner streams: antithetic sampling needs an even count");
}

}  // namespace detail

/// e^{-t/2} B + sqrt(1 - e^{-t}) B-hat.
inline Path mehler_mix(const Path& outer, const Path& hat, double t) {
    return combine(outer, std::exp(-0.5 * t), hat, std::sqrt(-std::expm1(-t)));
}

template <BrownianFunctional F>
InnerEstimate mehler_semigroup(const F& f, const Path& outer, double t, const InnerStreams& inner) {
    if (!(t >= 0.0)) throw DomainError("mehler semigroup: t must be non-negative");
    if (t == 0.0) return {static_cast<double>(f(outer)), 0.0};
    detail::check_inner(inner);
    std::vector<double> xs(inner.count);
    for (std::size_t j = 0; j < inner.count; ++j) xs[j] = f(mehler_mix(outer, inner.path(outer.grid(), j), t));
    return detail::inner_moments(xs, inner.antithetic);
}

/// Central difference in theta of F(B cos(theta) + B-hat sin(theta)).
template <BrownianFunctional F>
double gradient_brownian_rotation(const F& f, const Path& outer, const Path& hat, double theta) {
    if (!(theta > 0.0)) throw DomainError("rotation gradient: theta must be positive");
    return (f(rotate(outer, hat, theta)) - f(rotate(outer, hat, -theta))) / (2.0 * theta);
}

/// Gamma[F] at one outer path: inner average of the squared rotation gradient.
template <BrownianFunctional F>
InnerEstimate carre_du_champ(const F& f, const Path& outer, const InnerStreams& inner, double theta) {
    detail::check_inner(inner);
    if (inner.count < 2) throw ConfigError("carre du champ: need at least two inner streams");
    std::vector<double> xs(inner.count);
    for (std::size_t j = 0; j < inner.count; ++j) {
        const double g = gradient_brownian_rotation(f, outer, inner.path(outer.grid(), j), theta);
        xs[j] = g * g;
    }
    return detail::inner_moments(xs, inner.antithetic);
}

/// (P_t(F^2) - 2 F P_t F + F^2) / t for each t, computed as E-hat[(F(mix_t) - F(B))^2] / t
/// with the same B-hat samples for all three semigroup terms.
template <BrownianFunctional F>
std::vector<InnerEstimate> semigroup_limit_gamma(const F& f, const Path& outer, const std::vector<double>& t_list,
                                                 const InnerStreams& inner) {
    detail::check_inner(inner);
    const double f0 = f(outer);
    std::vector<Path> hats;
    hats.reserve(inner.count);
    for (std::size_t j = 0; j < inner.count; ++j) hats.push_back(inner.path(outer.grid(), j));
    std::vector<InnerEstimate> out;
    std::vector<double> xs(inner.count);
    for (double t : t_list) {
        if (!(t > 0.0)) throw DomainError("semigroup limit: all t must be positive");
        for (std::size_t j = 0; j < inner.count; ++j) {
            const double d = f(mehler_mix(outer, hats[j], t)) - f0;
            xs[j] = d * d / t;
        }
        out.push_back(detail::inner_moments(xs, inner.antithetic));
    }
    return out;
}

/// Richardson extrapolation of the semigroup bracket to t = 0.
inline double extrapolate_gamma(const std::vector<double>& t_list, const std::vector<InnerEstimate>& values) {
    std::vector<double> ys;
    for (const auto& v : values) ys.push_back(v.mean);
    return extrapolate_to_zero(t_list, ys);
}

}  // namespace lentp
