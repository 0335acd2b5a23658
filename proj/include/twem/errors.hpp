#pragma once

#include <stdexcept>
#include <string>

namespace twem {

/// Base of every numerical failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (non-finite input, NaN integrand).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Triangle with vanishing area where a finite value was requested.
class SingularGeometryError : public Error {
public:
  using Error::Error;
};

/// Vanishing kinematic denominator (final-state energy factor).
class SingularKinematicsError : public Error {
public:
  using Error::Error;
};

/// Emission peak angle has no real solution.
class NoPeakError : public Error {
public:
  using Error::Error;
};

/// Successive extrapolation estimates moved apart instead of together.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Adaptive quadrature ran out of subdivisions; carries the best estimate.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string &what, double best, double err)
      : Error(what), best_estimate(best), error_estimate(err) {}

  double best_estimate;
  double error_estimate;
};

/// A scan whose every value is zero cannot be max-normalized.
class EmptyChannelError : public Error {
public:
  using Error::Error;
};

/// Twisted beam with zero transverse momentum where one is required.
class DegenerateBeamError : public Error {
public:
  using Error::Error;
};

/// Invalid user-facing configuration (detector window, run parameters).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Floating-point results that contradict an internal invariant.
class InternalConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace twem
