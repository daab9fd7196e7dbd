#pragma once

// Counter-keyed random streams.
//
// Every stream is identified by (master_seed, family, index, sub_index) and is
// a SplitMix64 sequence started at a hash of that key. A path therefore never
// depends on which other paths were generated before it, or on which thread
// generated it.

#include <cstdint>
#include <limits>
#include <random>

namespace lentp {

enum class StreamFamily : std::uint64_t {
    brownian = 1,
    poisson = 2,
    compound_poisson = 3,
    brownian_copy = 4,   // B-hat of the Mehler / rotation formulas
    inner = 5,           // inner Monte Carlo level, keyed (outer, inner)
    auxiliary = 6,
};

namespace detail {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Key of one random stream. Value type; cheap to copy.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
    StreamFamily family = StreamFamily::brownian;
    std::uint64_t sub_index = 0;

    [[nodiscard]] constexpr RngStream with_family(StreamFamily f) const noexcept {
        return {master_seed, stream_index, f, sub_index};
    }
    [[nodiscard]] constexpr RngStream with_sub_index(std::uint64_t s) const noexcept {
        return {master_seed, stream_index, family, s};
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept {
        std::uint64_t h = detail::splitmix_finalize(master_seed + detail::golden_gamma);
        h = detail::splitmix_finalize(h ^ (static_cast<std::uint64_t>(family) * detail::golden_gamma));
        h = detail::splitmix_finalize(h ^ (stream_index + 0x632be59bd9b4e019ULL));
        h = detail::splitmix_finalize(h ^ (sub_index * 0xd1b54a32d192ed03ULL + 1));
        return h;
    }
};

/// SplitMix64 engine; satisfies UniformRandomBitGenerator.
class CounterEngine {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterEngine(const RngStream& stream) noexcept : state_(stream.key()) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += detail::golden_gamma;
        return detail::splitmix_finalize(state_);
    }

    /// Uniform on the open interval (0,1), 53-bit resolution.
    constexpr double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Gaussian sampler bound to one stream.
class GaussianStream {
public:
    explicit GaussianStream(const RngStream& stream) : engine_(stream) {}

    double operator()(double stddev) { return stddev * normal_(engine_); }
    double standard() { return normal_(engine_); }
    CounterEngine& engine() noexcept { return engine_; }

private:
    CounterEngine engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lentp
