#pragma once

// Error taxonomy shared across the library. Callers that violate documented
// preconditions get std::invalid_argument; the types below flag conditions
// detected at run time inside otherwise valid calls.

#include <stdexcept>
#include <string>

namespace keig {

// All selection / normalization weights were -inf, so no distribution exists.
struct DegenerateWeightsError : std::runtime_error {
  explicit DegenerateWeightsError(const std::string& what) : std::runtime_error(what) {}
};

// A model density or sampler failed to produce a usable value.
struct ModelEvalError : std::runtime_error {
  explicit ModelEvalError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver hit its iteration cap; carries the last residual seen.
struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
  double last_residual;
};

// A diagnostic was requested that the given model cannot support
// (e.g. ratio bounds without declared density bounds).
struct UnsupportedDiagnostic : std::runtime_error {
  explicit UnsupportedDiagnostic(const std::string& what) : std::runtime_error(what) {}
};

// An internal algebraic identity failed; indicates a bug or corrupted state.
struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// A file could not be created or written.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace keig
