#pragma once

// Elementary-tensor kernels of multiple stochastic integrals.
//
// A SimplexKernel of order n built from factors g_1..g_n stands for one of two
// symmetric functions on R^n:
//   symmetrized : f = weight * sym(g_1 (x) ... (x) g_n)
//   simplex     : f = weight * g_1(s_1)...g_n(s_n) on s_1 < ... < s_n, extended symmetrically
// Both coincide when all factors are equal. In either case
// I_n(f) = n! * int_{simplex} f dX^{(n)}.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/paths.hpp"
#include "lentp/step_function.hpp"

namespace lentp {

inline constexpr std::size_t default_max_order = 8;

enum class KernelForm { symmetrized, simplex };

inline double factorial(std::size_t n) noexcept {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

/// Permanent of a square row-major matrix (Ryser's formula).
inline double permanent(std::span<const double> m, std::size_t n) {
    if (n == 0) return 1.0;
    double total = 0.0;
    const std::size_t subsets = std::size_t{1} << n;
    std::vector<double> row_sums(n);
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        std::fill(row_sums.begin(), row_sums.end(), 0.0);
        for (std::size_t c = 0; c < n; ++c) {
            if (mask & (std::size_t{1} << c)) {
                for (std::size_t r = 0; r < n; ++r) row_sums[r] += m[r * n + c];
            }
        }
        double prod = 1.0;
        for (double v : row_sums) prod *= v;
        const auto bits = static_cast<std::size_t>(std::popcount(mask));
        total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return total;
}

class SimplexKernel {
public:
    SimplexKernel() = default;

    /// Order-0 kernel: the constant `value`.
    static SimplexKernel constant(double value) {
        SimplexKernel k;
        k.weight_ = value;
        return k;
    }

    SimplexKernel(std::vector<StepFunction> factors, double weight = 1.0, KernelForm form = KernelForm::symmetrized,
                  std::size_t max_order = default_max_order)
        : factors_(std::move(factors)), weight_(weight), form_(form) {
        if (factors_.size() > max_order) {
            throw ConfigError("kernel order " + std::to_string(factors_.size()) + " exceeds maximum " +
                              std::to_string(max_order));
        }
    }

    /// Checked construction from a declared order, as read from a kernel file.
    static SimplexKernel with_order(std::size_t order, std::vector<StepFunction> factors, double weight = 1.0,
                                    KernelForm form = KernelForm::symmetrized,
                                    std::size_t max_order = default_max_order) {
        if (factors.size() != order) {
            throw ConfigError("invalid kernel: order " + std::to_string(order) + " but " +
                              std::to_string(factors.size()) + " factors");
        }
        return SimplexKernel(std::move(factors), weight, form, max_order);
    }

    /// h (x) ... (x) h, n times.
    static SimplexKernel power(const StepFunction& h, std::size_t n, double weight = 1.0) {
        return SimplexKernel(std::vector<StepFunction>(n, h), weight);
    }

    [[nodiscard]] std::size_t order() const noexcept { return factors_.size(); }
    [[nodiscard]] const std::vector<StepFunction>& factors() const noexcept { return factors_; }
    [[nodiscard]] double weight() const noexcept { return weight_; }
    [[nodiscard]] KernelForm form() const noexcept { return form_; }
    [[nodiscard]] bool all_factors_equal() const noexcept {
        return std::adjacent_find(factors_.begin(), factors_.end(), std::not_equal_to<>()) == factors_.end();
    }

    [[nodiscard]] SimplexKernel scaled(double c) const {
        SimplexKernel k = *this;
        k.weight_ *= c;
        return k;
    }

    /// ||f||^2 in L^2(R^n, lambda_n).
    [[nodiscard]] double norm_sq() const;

private:
    std::vector<StepFunction> factors_;
    double weight_ = 1.0;
    KernelForm form_ = KernelForm::symmetrized;
};

/// <f, g> in L^2(R^n); zero for kernels of different orders.
inline double inner_product(const SimplexKernel& f, const SimplexKernel& g) {
    const std::size_t n = f.order();
    if (g.order() != n) return 0.0;
    const double w = f.weight() * g.weight();
    if (n == 0) return w;
    const auto& a = f.factors();
    const auto& b = g.factors();

    const bool f_sym = f.form() == KernelForm::symmetrized || f.all_factors_equal();
    const bool g_sym = g.form() == KernelForm::symmetrized || g.all_factors_equal();

    if (f_sym && g_sym) {
        std::vector<double> gram(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = inner_product(a[i], b[j]);
        return w * permanent(gram, n) / factorial(n);
    }
    if (!f_sym && !g_sym) {
        std::vector<StepFunction> prods(n);
        for (std::size_t i = 0; i < n; ++i) prods[i] = product(a[i], b[i]);
        return w * factorial(n) * simplex_integral(prods);
    }
    // simplex against symmetrized: sum over orderings of the symmetrized factors
    const auto& simplex_factors = f_sym ? b : a;
    const auto& sym_factors = f_sym ? a : b;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<StepFunction> prods(n);
    double total = 0.0;
    do {
        for (std::size_t i = 0; i < n; ++i) prods[i] = product(simplex_factors[i], sym_factors[perm[i]]);
        total += simplex_integral(prods);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return w * total;
}

inline double SimplexKernel::norm_sq() const { return inner_product(*this, *this); }

/// A kernel with its factors sampled at the left endpoints of a grid, and the
/// factor orderings that the discrete iterated integral must sum over.
class CompiledKernel {
public:
    CompiledKernel(const SimplexKernel& kernel, const TimeGrid& grid) : grid_(grid), order_(kernel.order()) {
        const std::size_t n = order_;
        // distinct factors, by equality
        std::vector<std::size_t> label(n);
        std::vector<const StepFunction*> distinct;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& g = kernel.factors()[i];
            auto it = std::find_if(distinct.begin(), distinct.end(), [&](const StepFunction* d) { return *d == g; });
            if (it == distinct.end()) {
                label[i] = distinct.size();
                distinct.push_back(&g);
            } else {
                label[i] = static_cast<std::size_t>(it - distinct.begin());
            }
        }
        for (const auto* d : distinct) samples_.push_back(d->sample_left(grid));

        const bool sym = kernel.form() == KernelForm::symmetrized && n > 0;
        if (sym) {
            // I_n(sym g) = sum over all n! orderings of the simplex integral;
            // equal factors make orderings coincide, so enumerate distinct ones.
            std::vector<std::size_t> counts(distinct.size(), 0);
            for (auto l : label) ++counts[l];
            double multiplicity = 1.0;
            for (auto c : counts) multiplicity *= factorial(c);
            std::vector<std::size_t> seq = label;
            std::sort(seq.begin(), seq.end());
            do {
                sequences_.push_back(seq);
            } while (std::next_permutation(seq.begin(), seq.end()));
            scale_ = kernel.weight() * multiplicity;
        } else {
            sequences_.push_back(label);
            scale_ = kernel.weight() * factorial(n);
        }
    }

    [[nodiscard]] std::size_t order() const noexcept { return order_; }
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] const std::vector<std::vector<std::size_t>>& sequences() const noexcept { return sequences_; }
    [[nodiscard]] std::span<const double> factor_samples(std::size_t label) const { return samples_[label]; }

private:
    TimeGrid grid_;
    std::size_t order_;
    std::vector<std::vector<double>> samples_;
    std::vector<std::vector<std::size_t>> sequences_;
    double scale_ = 1.0;
};

namespace detail {

inline void check_driver(const CompiledKernel& k, const Path& driver) {
    if (!(k.grid() == driver.grid())) throw DimensionError("kernel compiled for a different grid than the driver");
}

}  // namespace detail

/// Discrete iterated integral I_n(f) against `driver`, by the forward recursion
/// J_k(t_{j+1}) = J_k(t_j) + J_{k-1}(t_j) g_k(t_j) dX_j.
inline double iterated_integral(const CompiledKernel& k, const Path& driver) {
    detail::check_driver(k, driver);
    const std::size_t n = k.order();
    if (n == 0) return k.scale();
    const auto dx = driver.increments();
    std::vector<double> j_state(n + 1);
    std::vector<const double*> g(n);
    double total = 0.0;
    for (const auto& seq : k.sequences()) {
        for (std::size_t p = 0; p < n; ++p) g[p] = k.factor_samples(seq[p]).data();
        std::fill(j_state.begin(), j_state.end(), 0.0);
        j_state[0] = 1.0;
        for (std::size_t j = 0; j < dx.size(); ++j) {
            const double d = dx[j];
            for (std::size_t p = n; p >= 1; --p) j_state[p] += j_state[p - 1] * g[p - 1][j] * d;
        }
        total += j_state[n];
    }
    return k.scale() * total;
}

inline double iterated_integral(const SimplexKernel& kernel, const Path& driver) {
    return iterated_integral(CompiledKernel(kernel, driver.grid()), driver);
}

/// Partial derivatives of the discrete iterated integral with respect to each
/// increment dX_j. Entry j is the discrete Malliavin derivative D_{t_j}I_n(f):
/// the response of I_n(f) to a unit jump carried by increment j.
inline std::vector<double> derivative_profile(const CompiledKernel& k, const Path& driver) {
    detail::check_driver(k, driver);
    const std::size_t n = k.order();
    const std::size_t steps = driver.n_steps();
    std::vector<double> out(steps, 0.0);
    if (n == 0) return out;
    const auto dx = driver.increments();

    // prefix[m][j]: iterated sum of factors 1..m over indices < j
    std::vector<std::vector<double>> prefix(n, std::vector<double>(steps));
    std::vector<double> suffix(n + 2);
    std::vector<const double*> g(n);
    std::vector<double> state(n + 1);

    for (const auto& seq : k.sequences()) {
        for (std::size_t p = 0; p < n; ++p) g[p] = k.factor_samples(seq[p]).data();
        std::fill(state.begin(), state.end(), 0.0);
        state[0] = 1.0;
        for (std::size_t j = 0; j < steps; ++j) {
            for (std::size_t m = 0; m < n; ++m) prefix[m][j] = state[m];
            const double d = dx[j];
            for (std::size_t p = n; p >= 1; --p) state[p] += state[p - 1] * g[p - 1][j] * d;
        }
        // suffix[m]: iterated sum of factors m..n (1-based) over indices > j
        std::fill(suffix.begin(), suffix.end(), 0.0);
        suffix[n + 1] = 1.0;
        for (std::size_t j = steps; j-- > 0;) {
            double dj = 0.0;
            for (std::size_t p = 1; p <= n; ++p) dj += g[p - 1][j] * prefix[p - 1][j] * suffix[p + 1];
            out[j] += dj;
            const double d = dx[j];
            for (std::size_t m = 1; m <= n; ++m) suffix[m] += g[m - 1][j] * d * suffix[m + 1];
        }
    }
    for (auto& v : out) v *= k.scale();
    return out;
}

}  // namespace lentp
