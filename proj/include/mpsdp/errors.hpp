#pragma once

#include <stdexcept>
#include <string>

namespace mpsdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix extents that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Index or parameter outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A size guard or enumeration cap was exceeded (CLI exit code 3).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: annihilated states, empty nets or DP lists,
/// no admissible eigenspace (CLI exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace mpsdp
