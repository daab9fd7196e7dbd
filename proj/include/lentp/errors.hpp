#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lentp {

/// Invalid configuration (bad grid, unknown registry name, out-of-range order).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two paths or arrays that must share a grid do not.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced by a time-stepping scheme.
class NumericalBlowup : public std::runtime_error {
public:
    NumericalBlowup(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The first-variation process vanished at the perturbation time.
class SingularFlow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lentp
