#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bsdelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of the function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A standing mathematical hypothesis fails for the requested parameters
// (e.g. mu <= gamma*sqrt(T)), so the quantity is undefined, not just hard.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Requested ensemble would exceed the configured memory cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// theta*beta*dt >= 1: the implicit step is not a contraction.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

// Regression normal matrix is unusable (non-finite entries, failed factorization).
class ConditioningError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), residual_(last_residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace bsdelab
