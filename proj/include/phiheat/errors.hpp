/// @file errors.hpp
/// @brief Exception types shared by every phiheat module.
#pragma once

#include <stdexcept>
#include <string>

namespace phiheat {

/// Base class; every error raised by the library derives from it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the admissible set (N in (1, n), c > 1, p <= n, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument is outside the validity range of a formula (beyond a cap, t <= 0, ...).
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration: bad scenario file, bc/domain mismatch, degenerate sizes.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown (non-convergence, nonpositive solution where positivity is required).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace phiheat
