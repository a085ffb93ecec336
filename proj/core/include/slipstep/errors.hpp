#pragma once

#include <stdexcept>
#include <string>

namespace slipstep {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN/inf reached the integrator.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario, skeleton, gain table or command-line configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Step target that cannot be used (below terrain, over a gap).
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Terrain query landed inside a gap; the planner must pick another target.
class RetargetError : public PlacementError {
 public:
  using PlacementError::PlacementError;
};

/// IK target out of reach. `shortfall()` is how far (m) the chain is too short.
class ReachabilityError : public Error {
 public:
  ReachabilityError(const std::string& what, double shortfall)
      : Error(what), shortfall_(shortfall) {}
  double shortfall() const { return shortfall_; }

 private:
  double shortfall_;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Output file or directory could not be written.
class WriteError : public IoError {
 public:
  using IoError::IoError;
};

/// Serialized document written by an incompatible schema version.
class VersionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace slipstep
