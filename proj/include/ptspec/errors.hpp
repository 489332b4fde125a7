#pragma once

#include <stdexcept>
#include <string>

namespace ptspec {

// Trajectory magnitude exceeded the runaway guard; signals a badly wrong mu
// guess to the Newton driver, which treats it as a rejected step.
class OverflowError : public std::runtime_error {
public:
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

// Integration step does not place a mesh node on the delta position.
class StepMisaligned : public std::logic_error {
public:
  explicit StepMisaligned(const std::string& what) : std::logic_error(what) {}
};

class NoConvergence : public std::runtime_error {
public:
  NoConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_norm(residual) {}
  double residual_norm;
};

class NoConvergenceQR : public std::runtime_error {
public:
  explicit NoConvergenceQR(const std::string& what) : std::runtime_error(what) {}
};

class PathLost : public std::runtime_error {
public:
  PathLost(const std::string& what, double gamma)
      : std::runtime_error(what), gamma_at_loss(gamma) {}
  double gamma_at_loss;
};

class NotABranchPoint : public std::runtime_error {
public:
  explicit NotABranchPoint(const std::string& what) : std::runtime_error(what) {}
};

class MissingGamma : public std::invalid_argument {
public:
  explicit MissingGamma(const std::string& what) : std::invalid_argument(what) {}
};

class InsufficientData : public std::invalid_argument {
public:
  explicit InsufficientData(const std::string& what) : std::invalid_argument(what) {}
};

class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ptspec
