#pragma once

#include <stdexcept>
#include <string>

namespace linnet {

/// Bad input: malformed files, invariant violations, out-of-range arguments.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that could not complete (non-PD covariance, optimizer failure, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace linnet
