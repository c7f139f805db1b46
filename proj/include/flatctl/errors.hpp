#pragma once

#include <stdexcept>
#include <string>

namespace flatctl {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operands whose sizes, orders or centers do not line up.
class MismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Division by a jet (or matrix pivot) that vanishes.
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative method failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved = -1.0)
        : std::runtime_error(what), achieved_(achieved) {}

    /// Best tolerance reached before giving up, or -1 when not meaningful.
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Time grid does not satisfy a solver's requirements.
class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values or other numerical breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace flatctl
