#pragma once

#include <stdexcept>
#include <string>

namespace levy {

class LevyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (e.g. y = 0 for a Lévy density).
class DomainError : public LevyError {
public:
    using LevyError::LevyError;
};

/// Model fails a hypothesis required by the requested construction.
class ValidationError : public LevyError {
public:
    using LevyError::LevyError;
};

/// Parameters outside the supported cases.
class UnsupportedError : public LevyError {
public:
    using LevyError::LevyError;
};

/// Malformed input (JSON, CSV, flag syntax).
class ParseError : public LevyError {
public:
    using LevyError::LevyError;
};

/// Numerical failure; carries the best estimate available when it was raised.
class NumericalError : public LevyError {
public:
    NumericalError(const std::string& what, double partial = 0.0, double error_estimate = 0.0)
        : LevyError(what), partial_(partial), error_estimate_(error_estimate) {}
    double partial() const { return partial_; }
    double error_estimate() const { return error_estimate_; }

private:
    double partial_;
    double error_estimate_;
};

}  // namespace levy
