#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace quadsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// |cos(theta)| fell below the kinematic singularity tolerance.
class GimbalLockError : public Error {
 public:
  explicit GimbalLockError(double cos_theta)
      : Error("euler rate transform singular: |cos(theta)| = " +
              std::to_string(std::abs(cos_theta))),
        cos_theta(cos_theta) {}
  double cos_theta;
};

/// The thrust law divides by cos(phi)*cos(theta); the vehicle is near
/// inverted and the control law is undefined.
class ThrustSingularityError : public Error {
 public:
  ThrustSingularityError(double cos_product, double time)
      : Error("thrust singularity: cos(phi)*cos(theta) = " +
              std::to_string(cos_product) + " at t = " + std::to_string(time)),
        cos_product(cos_product),
        time(time) {}
  double cos_product;
  double time;  // simulation time (s); negative if not attached to a run
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

class NumericalBlowupError : public Error {
 public:
  explicit NumericalBlowupError(double time)
      : Error("state magnitude exceeded blowup guard at t = " +
              std::to_string(time)),
        time(time) {}
  double time;
};

class EmptyTraceError : public Error {
 public:
  EmptyTraceError() : Error("trace contains no rows") {}
};

class WrongControllerError : public Error {
 public:
  explicit WrongControllerError(const std::string& what) : Error(what) {}
};

class MismatchedScenarioError : public Error {
 public:
  explicit MismatchedScenarioError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace quadsim
