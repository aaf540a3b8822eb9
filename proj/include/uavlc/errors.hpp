#pragma once

#include <stdexcept>
#include <string>

namespace uavlc {

// Error taxonomy for the whole library. Everything derives from
// std::runtime_error so callers may catch coarsely or by exact type.

/// Scenario file does not match the expected schema (message names the field path).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scenario parsed but violates a structural invariant (message names it).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Transmitter and receiver coincide; no channel geometry exists.
struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A served user has zero channel gain on every path, so no finite power works.
struct InfeasibleChannel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A user cannot be covered by any UAV at all.
struct NoCoverage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Phase optimization was asked to run with no reflecting surface attached.
struct EmptyRisSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A link has zero path loss at the linearization point and is dropped.
struct ZeroPathLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Iterative solver stopped before reaching its tolerance.
struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& msg, int iterations_run, double best_residual)
      : std::runtime_error(msg), iterations(iterations_run), residual(best_residual) {}
  int iterations = 0;
  double residual = 0.0;
};

/// The supplied problem (or start point) is infeasible; message names the constraint.
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A brute-force oracle would exceed its enumeration budget.
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace uavlc
