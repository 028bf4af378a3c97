#pragma once

#include <stdexcept>
#include <string>

namespace cdf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state left the physical domain of a model (e.g. u <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or algorithm parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration (also used for unusable sampling plans).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (final residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A time step exceeded the stability limit of the explicit transport update.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// A model refused to run because it failed the structural audit.
class AuditFailure : public Error {
 public:
  using Error::Error;
};

/// The integrator reached an inadmissible state.
class SimulationAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace cdf
