#pragma once

#include <stdexcept>
#include <string>

namespace threshold_regret {

/// Malformed input: bad sample, out-of-range parameter, inconsistent flags.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a finite, meaningful result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Local polynomial fit is rank deficient (too little data near the point).
class InsufficientLocalData : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace threshold_regret
