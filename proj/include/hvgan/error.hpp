#pragma once

#include <stdexcept>
#include <string>

namespace hvgan {

/// Precondition or validation failure (bad shapes, bad arguments, bad config).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced NaN/Inf, or was asked to (log of a non-positive value).
class NumericError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hvgan
