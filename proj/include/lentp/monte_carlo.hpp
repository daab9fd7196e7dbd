#pragma once

// Path-parallel Monte Carlo plumbing. Per-path results are written into a
// vector indexed by path and reduced sequentially, so every aggregate is a
// pure function of (seed, config) whatever the worker count.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "lentp/time_grid.hpp"

namespace lentp {

struct EstimatorReport {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t master_seed = 0;
    double horizon = 0.0;
    std::size_t n_steps = 0;

    /// (mean - target) / std_error; infinite when the estimate is exact but off target.
    [[nodiscard]] double z_score(double target) const noexcept {
        const double d = mean - target;
        if (std_error > 0.0) return d / std_error;
        return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
    }
    [[nodiscard]] bool within(double target, double n_se) const noexcept {
        return std::abs(mean - target) <= n_se * std_error;
    }
};

struct SampleMoments {
    double mean = 0.0;
    double std_error = 0.0;
    double std_dev = 0.0;
};

inline SampleMoments sample_moments(std::span<const double> xs) noexcept {
    SampleMoments m;
    const auto n = xs.size();
    if (n == 0) return m;
    double s = 0.0;
    for (double x : xs) s += x;
    m.mean = s / static_cast<double>(n);
    if (n < 2) return m;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
    m.std_error = m.std_dev / std::sqrt(static_cast<double>(n));
    return m;
}

inline EstimatorReport summarize(std::span<const double> xs, std::uint64_t seed, const TimeGrid& grid) noexcept {
    const auto m = sample_moments(xs);
    return {m.mean, m.std_error, xs.size(), seed, grid.horizon(), grid.n_steps()};
}

/// Sample correlation of paired samples.
inline double sample_correlation(std::span<const double> x, std::span<const double> y) noexcept {
    const auto mx = sample_moments(x);
    const auto my = sample_moments(y);
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxy /= static_cast<double>(x.size() - 1);
    return sxy / (mx.std_dev * my.std_dev);
}

inline unsigned default_workers() noexcept {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Evaluates fn(i) for i in [0, n) on `workers` threads; out[i] = fn(i).
template <class Fn>
auto map_paths(std::size_t n, unsigned workers, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<T> out(n);
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    const std::size_t w = std::min<std::size_t>(workers, n);
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = n * t / w;
        const std::size_t end = n * (t + 1) / w;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace lentp
