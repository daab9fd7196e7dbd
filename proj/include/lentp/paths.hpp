#pragma once

// Driving processes on a shared TimeGrid.
//
// A Path stores its increments (increment j runs from t_j to t_{j+1}) and the
// levels at every grid point (levels[0] is the value at time 0). A jump that
// lands on grid point t_k is carried by increment k-1, so the level at t_k
// already contains it.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "lentp/errors.hpp"
#include "lentp/rng.hpp"
#include "lentp/time_grid.hpp"

namespace lentp {

struct Jump {
    std::size_t grid_index;  // first grid point whose level includes the jump
    double arrival;          // unsnapped arrival time
    double mark;
};

class Path {
public:
    explicit Path(TimeGrid grid) : grid_(grid), increments_(grid.n_steps(), 0.0), levels_(grid.n_steps() + 1, 0.0) {}

    /// Builds levels as the running sum of the increments, starting from 0.
    static Path from_increments(TimeGrid grid, std::vector<double> increments, std::vector<Jump> jumps = {}) {
        if (increments.size() != grid.n_steps()) {
            throw DimensionError("path: increment count does not match grid");
        }
        Path p(grid);
        p.increments_ = std::move(increments);
        double level = 0.0;
        for (std::size_t j = 0; j < p.increments_.size(); ++j) {
            level += p.increments_[j];
            p.levels_[j + 1] = level;
        }
        p.jumps_ = std::move(jumps);
        return p;
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t n_steps() const noexcept { return increments_.size(); }
    [[nodiscard]] std::span<const double> increments() const noexcept { return increments_; }
    [[nodiscard]] std::span<const double> levels() const noexcept { return levels_; }
    [[nodiscard]] const std::vector<Jump>& jumps() const noexcept { return jumps_; }

    [[nodiscard]] double increment(std::size_t j) const { return increments_[j]; }
    [[nodiscard]] double level(std::size_t k) const { return levels_[k]; }
    [[nodiscard]] double terminal() const { return levels_.back(); }

    /// Value at the last grid point not after t (the path is cadlag and constant between grid points).
    [[nodiscard]] double value_at(double t) const {
        if (t <= 0.0) return levels_.front();
        if (t >= grid_.horizon()) return levels_.back();
        const double r = t / grid_.dt();
        const double nearest = std::round(r);
        const auto k = std::abs(r - nearest) <= 1e-9 * std::max(1.0, r) ? static_cast<std::size_t>(nearest)
                                                                         : static_cast<std::size_t>(std::floor(r));
        return levels_[std::min(k, n_steps())];
    }

    std::vector<double>& mutable_increments() noexcept { return increments_; }
    std::vector<double>& mutable_levels() noexcept { return levels_; }
    std::vector<Jump>& mutable_jumps() noexcept { return jumps_; }

private:
    TimeGrid grid_;
    std::vector<double> increments_;
    std::vector<double> levels_;
    std::vector<Jump> jumps_;
};

/// (cos theta, sin theta) with the values at multiples of pi/2 made exact.
inline std::pair<double, double> rotation_coefficients(double theta) noexcept {
    double c = std::cos(theta);
    double s = std::sin(theta);
    if (std::abs(c) < 1e-15) {
        c = 0.0;
        s = s > 0.0 ? 1.0 : -1.0;
    } else if (std::abs(s) < 1e-15) {
        s = 0.0;
        c = c > 0.0 ? 1.0 : -1.0;
    }
    return {c, s};
}

inline Path simulate_brownian(const TimeGrid& grid, const RngStream& stream) {
    GaussianStream gauss(stream);
    const double sd = std::sqrt(grid.dt());
    std::vector<double> inc(grid.n_steps());
    for (auto& x : inc) x = gauss(sd);
    return Path::from_increments(grid, std::move(inc));
}

namespace detail {

// Unit-rate arrivals from exponential gaps, each snapped forward to a grid
// point strictly after the previous jump; arrivals past T are dropped.
template <class MarkFn>
std::vector<Jump> poisson_jumps(const TimeGrid& grid, const RngStream& stream, MarkFn&& mark) {
    CounterEngine engine(stream);
    std::exponential_distribution<double> gap(1.0);
    std::vector<Jump> jumps;
    double arrival = 0.0;
    std::size_t previous = 0;
    for (;;) {
        arrival += gap(engine);
        if (arrival > grid.horizon()) break;
        std::size_t k = grid.snap_forward(arrival);
        if (k <= previous) k = previous + 1;
        if (k > grid.n_steps()) break;
        jumps.push_back({k, arrival, mark(engine)});
        previous = k;
    }
    return jumps;
}

}  // namespace detail

/// Compensated unit-rate Poisson process: levels N_{t_k} - t_k.
inline Path simulate_compensated_poisson(const TimeGrid& grid, const RngStream& stream) {
    auto jumps = detail::poisson_jumps(grid, stream, [](CounterEngine&) { return 1.0; });
    Path p(grid);
    auto& inc = p.mutable_increments();
    auto& lev = p.mutable_levels();
    const double dt = grid.dt();
    for (auto& x : inc) x = -dt;
    for (const auto& j : jumps) inc[j.grid_index - 1] += 1.0;
    std::size_t count = 0;
    std::size_t next = 0;
    for (std::size_t k = 1; k <= grid.n_steps(); ++k) {
        while (next < jumps.size() && jumps[next].grid_index == k) {
            ++count;
            ++next;
        }
        lev[k] = static_cast<double>(count) - grid.time(k);
    }
    p.mutable_jumps() = std::move(jumps);
    return p;
}

/// Compound Poisson process with marks +-1 of probability 1/2 (no compensator needed).
inline Path simulate_symmetric_compound_poisson(const TimeGrid& grid, const RngStream& stream) {
    auto jumps = detail::poisson_jumps(grid, stream,
                                       [](CounterEngine& e) { return (e() >> 63) != 0 ? 1.0 : -1.0; });
    std::vector<double> inc(grid.n_steps(), 0.0);
    for (const auto& j : jumps) inc[j.grid_index - 1] += j.mark;
    return Path::from_increments(grid, std::move(inc), std::move(jumps));
}

/// a * first + b * second, incrementwise and levelwise.
inline Path combine(const Path& first, double a, const Path& second, double b) {
    if (!(first.grid() == second.grid())) {
        throw DimensionError("combine: paths live on different grids");
    }
    Path out(first.grid());
    auto& inc = out.mutable_increments();
    auto& lev = out.mutable_levels();
    const auto fi = first.increments();
    const auto si = second.increments();
    for (std::size_t j = 0; j < inc.size(); ++j) inc[j] = a * fi[j] + b * si[j];
    const auto fl = first.levels();
    const auto sl = second.levels();
    for (std::size_t k = 0; k < lev.size(); ++k) lev[k] = a * fl[k] + b * sl[k];
    if (b != 0.0) {
        for (const auto& j : second.jumps()) out.mutable_jumps().push_back({j.grid_index, j.arrival, b * j.mark});
    }
    if (a != 0.0) {
        for (const auto& j : first.jumps()) out.mutable_jumps().push_back({j.grid_index, j.arrival, a * j.mark});
    }
    return out;
}

/// Y^theta = B cos(theta) + M sin(theta).
inline Path rotate(const Path& brownian, const Path& martingale, double theta) {
    const auto [c, s] = rotation_coefficients(theta);
    return combine(brownian, c, martingale, s);
}

/// path + a * 1_{t >= u}, with u snapped forward to the grid.
inline Path add_unit_jump(const Path& path, double u, double a) {
    const std::size_t k = path.grid().snap_forward(u);
    Path out = path;
    if (a == 0.0) return out;
    out.mutable_increments()[k - 1] += a;
    auto& lev = out.mutable_levels();
    for (std::size_t i = k; i < lev.size(); ++i) lev[i] += a;
    out.mutable_jumps().push_back({k, u, a});
    return out;
}

/// Discrete Ito sum  sum_j integrand[j] * dX_j  with left-endpoint integrand values.
inline double stochastic_integral(std::span<const double> integrand, const Path& driver) {
    if (integrand.size() != driver.n_steps()) {
        throw DimensionError("stochastic_integral: integrand length does not match grid");
    }
    const auto dx = driver.increments();
    double s = 0.0;
    for (std::size_t j = 0; j < dx.size(); ++j) s += integrand[j] * dx[j];
    return s;
}

}  // namespace lentp

namespace lentp {

/// The independent normal martingale M paired with B in a rotation.
enum class MartingaleKind { compensated_poisson, symmetric_compound_poisson, brownian_copy };

inline const char* to_string(MartingaleKind k) noexcept {
    switch (k) {
        case MartingaleKind::compensated_poisson: return "compensated_poisson";
        case MartingaleKind::symmetric_compound_poisson: return "symmetric_compound_poisson";
        case MartingaleKind::brownian_copy: return "brownian_copy";
    }
    return "?";
}

/// Stream conventions shared by all Monte Carlo loops: path i of every driver
/// uses its own family, so B and M on the same index are independent.
inline Path brownian_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t index) {
    return simulate_brownian(grid, RngStream{seed, index, StreamFamily::brownian});
}

inline Path martingale_path(MartingaleKind kind, const TimeGrid& grid, std::uint64_t seed, std::uint64_t index) {
    switch (kind) {
        case MartingaleKind::compensated_poisson:
            return simulate_compensated_poisson(grid, RngStream{seed, index, StreamFamily::poisson});
        case MartingaleKind::symmetric_compound_poisson:
            return simulate_symmetric_compound_poisson(grid, RngStream{seed, index, StreamFamily::compound_poisson});
        case MartingaleKind::brownian_copy:
            return simulate_brownian(grid, RngStream{seed, index, StreamFamily::brownian_copy});
    }
    throw ConfigError("unknown martingale kind");
}

}  // namespace lentp
