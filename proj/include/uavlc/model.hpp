#pragma once

#include <cstdint>
#include <string>

#include "uavlc/types.hpp"

namespace uavlc {

/// Validates every structural invariant of a scenario; throws ValidationError
/// naming the first violated one.
void validate(const Scenario& s);

/// Parses a scenario from JSON text. Throws SchemaError (field path) or
/// ValidationError (violated invariant).
Scenario parse_scenario(const std::string& json_text);

/// Reads and parses a scenario file.
Scenario load_scenario(const std::string& path);

/// Serializes a scenario back to JSON (the inverse of parse_scenario).
std::string scenario_to_json(const Scenario& s);

// Knobs for scenario randomization. Counts default to "keep the template's".
struct RandomCounts {
  int users = -1;
  int ris = -1;
  int uavs = -1;
  int elements = -1;
  double demand_low = 1e-5;   // illumination demand interval
  double demand_high = 9e-5;
};

/// Draws a randomized copy of `base`: user and surface positions uniform in
/// the area, illumination demands uniform in the configured interval. Pure in
/// (base, seed, counts); entity k's draw depends only on (seed, kind, k), so
/// growing a count keeps the existing entities unchanged.
Scenario random_scenario(const Scenario& base, std::uint64_t seed,
                         const RandomCounts& counts = {});

/// Per-user power floor combining the rate and illumination demands: the
/// scalar A_j such that P >= A_j / h covers both. Zero when both demands vanish.
double power_floor(const Scenario& s, int user);

/// Minimum transmit power of UAV i: max over its served users of
/// power_floor / aggregate_gain; zero when it serves nobody.
/// Throws InfeasibleChannel when a served user with a positive floor has zero gain.
double required_power(const Scenario& s, const Eigen::Matrix2Xd& deployment,
                      const PhaseMatrix& phases, const Association& assoc, int uav);

/// Same, but returns +inf instead of throwing (candidate ranking).
double required_power_or_inf(const Scenario& s, const Eigen::Matrix2Xd& deployment,
                             const PhaseMatrix& phases, const Association& assoc,
                             int uav) noexcept;

/// Sum of required powers over all UAVs (+inf when any is infeasible).
double total_power_or_inf(const Scenario& s, const Solution& sol) noexcept;

// Per-constraint slacks of a candidate solution. Negative slack = violation;
// infeasibility is data here, not an error.
struct FeasibilityReport {
  Eigen::MatrixXd rate_slack;        // D x U; +inf where unserved
  Eigen::MatrixXd illumination_slack;  // D x U; +inf where unserved
  Eigen::MatrixXd separation_slack;  // D x D; +inf on the diagonal
  bool user_columns_ok = true;       // every user served exactly once
  bool ris_columns_ok = true;        // every surface assigned exactly once
  bool powers_nonnegative = true;
  bool idle_powers_zero = true;
  double min_slack = 0.0;            // most violated constraint

  bool feasible(double tol) const {
    return user_columns_ok && ris_columns_ok && powers_nonnegative &&
           idle_powers_zero && min_slack >= -tol;
  }
};

/// Evaluates rate, illumination, separation and column-sum slacks of `sol`.
FeasibilityReport check_feasibility(const Scenario& s, const Solution& sol);

}  // namespace uavlc
