#pragma once

#include <stdexcept>
#include <string>

namespace remsched {

/// Invalid input: bad dimensions, broken invariants, malformed configs.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver exhausted its iteration budget before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A requested enumeration exceeds a configured capacity bound.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace remsched
