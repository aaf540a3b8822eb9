#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uavlc/association.hpp"
#include "uavlc/deployment.hpp"
#include "uavlc/phases.hpp"
#include "uavlc/types.hpp"

namespace uavlc {

enum class Scheme {
  Scheme1Dual,    // full alternation, surface association by the dual method
  Scheme2Greedy,  // full alternation, surface association by the greedy pass
  NoRis,          // all reflected channels removed
  InitialOnly,
  PhaseOnly,
  DeploymentOnly,
  UserAssocOnly,
  RisAssocOnly,
};

/// Canonical scheme names as used by the command line.
std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct RunConfig {
  Scheme scheme = Scheme::Scheme1Dual;
  double outer_tol = 1e-4;
  int max_outer = 30;
  std::uint64_t seed = 0;
  PhaseOptions phase;
  ScaOptions sca;
  DualOptions user_assoc;
  DualOptions ris_assoc;
};

struct RunTrace {
  std::vector<double> objectives;  // total power after each outer pass; [0] = initial
  std::vector<std::vector<std::pair<std::string, double>>> block_objectives;
  std::vector<double> wall_seconds;  // per outer pass; not serialized
  Solution final;
  int outer_iters = 0;
  bool converged = false;
  std::vector<std::string> failures;  // solver failures recorded along the way
};

/// Random starting point: zero phases, uniform-random column-valid
/// associations, UAVs at the centroids of their users pushed apart to the
/// separation limit. Re-draws the association up to ten times when a served
/// user ends up with zero gain; throws NoCoverage if that cannot be fixed.
Solution initialize(const Scenario& s, std::uint64_t seed);

/// Alternating optimization: phases, deployment, user association, surface
/// association in that order, each block accepted only when the total power
/// does not increase. Stops when the relative change over one pass drops
/// below outer_tol or after max_outer passes.
RunTrace run(const Scenario& s, const RunConfig& config);

}  // namespace uavlc
