#pragma once

#include <stdexcept>
#include <string>

namespace gausseot {

enum class ErrorKind {
  Validation,
  Domain,
  AssumptionViolated,
  NumericalFailure,
  NonConvergence,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::AssumptionViolated: return "assumption_violated";
    case ErrorKind::NumericalFailure: return "numerical_failure";
    case ErrorKind::NonConvergence: return "non_convergence";
  }
  return "unknown";
}

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed user input (bad field, wrong shape, out-of-range parameter).
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(ErrorKind::Validation, field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A mathematical precondition failed (not PD, dimension mismatch, |R| >= 1).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// M_eps (or N in the correlation parametrization) is numerically singular.
class AssumptionViolated : public Error {
 public:
  explicit AssumptionViolated(const std::string& what)
      : Error(ErrorKind::AssumptionViolated, what) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what)
      : Error(ErrorKind::NumericalFailure, what) {}
};

/// Iterative oracle hit its iteration cap. Carries the last residual seen.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : Error(ErrorKind::NonConvergence, what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace gausseot
