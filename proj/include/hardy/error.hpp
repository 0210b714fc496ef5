#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Base of every error raised by the library.  `exit_code()` follows the
/// command-line contract: 2 for configuration problems, 3 for numerical ones.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Invalid input parameters (bad dimension, degree, exponent, key...).
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Tail beyond the truncated cylinder is too large to be trusted.
class TruncationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// H(t) vanishes: the field is (numerically) zero.
class DegeneracyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DetectionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class FitError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace hardy
