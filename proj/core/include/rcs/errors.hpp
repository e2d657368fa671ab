#pragma once

#include <stdexcept>
#include <string>

namespace rcs {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree. Always a caller bug.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Index or window outside the valid range.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (probability, sizes, thresholds...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Normal equations are rank deficient.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Matrix fails a structural requirement (zero column, not orthonormal).
class DegenerateMatrixError : public Error {
 public:
  using Error::Error;
};

/// Metric is undefined for the given inputs (e.g. zero-norm truth).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value in solver input or iterates.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcs
