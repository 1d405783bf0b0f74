#pragma once

#include <stdexcept>
#include <string>

namespace brw {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input violates a documented invariant (kernel, law, grid, config).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// A numerical procedure did not reach its tolerance. Carries the best
/// value obtained so callers can still report it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double partial_value, double error_estimate)
      : Error(msg), partial_value_(partial_value), error_estimate_(error_estimate) {}

  double partial_value() const { return partial_value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double partial_value_;
  double error_estimate_;
};

/// A computed quantity left its admissible range (e.g. a survival
/// probability outside [0,1]); indicates a discretization failure.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& msg) : Error(msg) {}
};

}  // namespace brw
