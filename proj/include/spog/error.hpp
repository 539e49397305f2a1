#pragma once

#include <stdexcept>
#include <string>

namespace spog {

/// Bad input: malformed files, inconsistent shapes, out-of-range parameters.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure during a numeric computation (overflow, NaN, degenerate value).
/// The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spog
