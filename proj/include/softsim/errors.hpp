#pragma once

#include <stdexcept>
#include <string>

namespace softsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown keys, out-of-range values, inconsistent shapes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed files, index/shape mismatches and evaluation preconditions.
class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised when a feature must be normalized but has zero (or non-finite) norm.
class DegenerateFeatureError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace softsim
