#pragma once

#include <stdexcept>
#include <string>

namespace ztot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Table or vector shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A bad argument value (non-positive tolerance, empty subset, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A type or result invariant does not hold (asymmetric metric, negative
/// weight, Lipschitz violation, monotonicity violation, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A plan does not have the required marginals, or a dual pair is not
/// admissible.
class FeasibilityError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

/// An iterative solve hit its sweep cap before reaching the tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double lastResidual, double beta)
        : Error(what), lastResidual_(lastResidual), beta_(beta) {}

    double last_residual() const noexcept { return lastResidual_; }
    double beta() const noexcept { return beta_; }

private:
    double lastResidual_;
    double beta_;
};

/// The exact oracle was asked for an instance beyond its enumeration cap.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Malformed problem file.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace ztot
