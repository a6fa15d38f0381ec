#pragma once

#include <stdexcept>
#include <string>

namespace waveguide {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. Y_m at x <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Result not representable in double precision; use the scaled form instead.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure failed to settle.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Trial energy sits on a channel threshold; perturb the energy and retry.
class DegenerateThresholdError : public Error {
 public:
  using Error::Error;
};

/// Elimination hit a vanishing radial value; perturb the energy and retry.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// The two smallest singular values are too close to isolate one null vector.
class NearDegenerateRootError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Requested fit regime cannot be resolved numerically.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Fit window for the asymptotic tail collapsed below its minimum length.
class WindowTooShortError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace waveguide
