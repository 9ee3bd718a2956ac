#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wavemap {

// Invalid configuration or grid parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operands live on incompatible grids or have mismatched channel counts.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A required input channel (for instance a time derivative) is missing.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exponent or argument outside the domain of a functional.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Smallness or flatness gate violated before a solve.
struct PreconditionError : std::runtime_error {
  PreconditionError(const std::string& what, double measured)
      : std::runtime_error(what), measured(measured) {}
  double measured;
};

// Fixed-point iteration stopped contracting.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, double ratio)
      : std::runtime_error(what), ratio(ratio) {}
  double ratio;
};

// Iteration budget exhausted; carries the residual history.
struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history(std::move(history)) {}
  std::vector<double> history;
};

// No composition candidate reproduced the calibration geodesic.
struct ReconstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wavemap
