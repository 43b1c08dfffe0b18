#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace gsc {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: bad specs, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that cannot support the requested computation,
// e.g. run records that all share a single parameter count.
class DegeneracyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A model evaluated outside its valid domain. Carries the offending
// parameter name and, when meaningful, the input value where the parameter
// crosses zero.
class DomainError : public Error {
 public:
  DomainError(std::string parameter, double zero_crossing, const std::string& message)
      : Error(message), parameter_(std::move(parameter)), zero_crossing_(zero_crossing) {}

  explicit DomainError(const std::string& message)
      : Error(message), zero_crossing_(std::nan("")) {}

  const std::string& parameter() const { return parameter_; }
  double zero_crossing() const { return zero_crossing_; }

 private:
  std::string parameter_;
  double zero_crossing_;
};

// Runtime numerical failure: non-convergence, impossible termination, overflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsc
