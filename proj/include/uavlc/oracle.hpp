#pragma once

#include <vector>

#include "uavlc/types.hpp"

namespace uavlc::oracle {

// Brute-force verifiers used by tests and nowhere else. They share channel
// and power arithmetic with the production path but reimplement every
// optimizer decision themselves.

struct GridPhaseResult {
  Eigen::MatrixXd theta;   // rows follow ris_set order
  double objective = 0.0;  // min-max value: max_j -(gain_j/A_j)^2
};

/// Exhaustive phase grid over all elements of the UAV's surfaces at the given
/// angular resolution. Throws TooLarge beyond 1e8 grid points.
GridPhaseResult grid_phase_search(const Scenario& s, const Eigen::Vector2d& q,
                                  const std::vector<int>& users,
                                  const std::vector<int>& ris_set,
                                  double resolution_deg);

struct AssociationSearchResult {
  Eigen::MatrixXi user_assoc;
  Eigen::MatrixXi ris_assoc;
  double total = 0.0;
};

/// Enumerates every column-valid pair of assignment matrices and prices each
/// with per-candidate coherent re-alignment of single-user UAVs (multi-user
/// UAVs keep the supplied phases). Throws TooLarge beyond 1e6 candidates.
AssociationSearchResult exhaustive_association(const Scenario& s,
                                               const Eigen::Matrix2Xd& deployment,
                                               const PhaseMatrix& phases);

struct GridDeploymentResult {
  Eigen::Matrix2Xd deployment;
  double total = 0.0;
};

/// Lattice search over UAV positions (step meters apart) at fixed phases and
/// association, honoring the pairwise separation. At most two UAVs and 1e4
/// lattice points per UAV.
GridDeploymentResult grid_deployment(const Scenario& s, const Association& assoc,
                                     const PhaseMatrix& phases, double step);

}  // namespace uavlc::oracle
