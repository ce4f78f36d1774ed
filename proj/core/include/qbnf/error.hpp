#pragma once

#include <stdexcept>
#include <string>

namespace qbnf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different phase spaces, or a term violates the phase-space constraints.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A homological denominator vanished on a term that should be removable.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// An iterative series or solver failed to settle within its cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Basis dimension exceeds the configured cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qbnf
