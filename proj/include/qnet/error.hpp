#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qnet {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A model assumption failed. `condition()` names it, e.g. "(A1)".
class ValidationError : public Error {
 public:
  ValidationError(std::string condition, const std::string& message)
      : Error(condition + ": " + message), condition_(std::move(condition)) {}

  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double lastResidual)
      : Error(message), residual_(lastResidual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qnet
