#pragma once

#include <stdexcept>
#include <string>

namespace sddpde {

/// Invalid scenario/configuration input. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Quadrature resolution rejected by the doubling-drift check.
class QuadratureError : public ConfigError {
  public:
    explicit QuadratureError(const std::string& msg) : ConfigError(msg) {}
};

/// Runtime failure while integrating or evaluating. CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation time outside the buffer window [anchor - r, anchor].
class WindowError : public SolverError {
  public:
    explicit WindowError(const std::string& msg) : SolverError(msg) {}
};

/// Fixed-point correction failed to converge within the iteration budget.
class NonConvergenceError : public SolverError {
  public:
    explicit NonConvergenceError(const std::string& msg) : SolverError(msg) {}
};

}  // namespace sddpde
