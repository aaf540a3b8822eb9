#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "uavlc/types.hpp"

namespace uavlc {

/// Closed-form coherent phase alignment for a UAV at `q` serving exactly one
/// user: every reflected element is rotated so all paths add in phase at the
/// user. Row r of the result holds the element phases of ris_set[r].
Eigen::MatrixXd align_phases(const Scenario& s, const Eigen::Vector2d& q, int user,
                             const std::vector<int>& ris_set);

/// Entrywise product of the conjugated surface->user vector with the
/// UAV->surface vector. The reflected term of a phase row theta equals
/// sum_m conj(z_m) phi_m with z_m = exp(-i theta_m).
Eigen::VectorXcd build_phi(const Scenario& s, const Eigen::Vector2d& q, int ris,
                           int user);

// Data of the min-max phase problem of one UAV: per served user a direct
// gain, a weight 1/A_j^2 and the per-surface phi vectors.
struct SdpInstance {
  std::vector<int> ris_ids;   // surfaces associated with the UAV, in row order
  int elements = 0;           // M
  std::vector<int> user_ids;  // served users
  std::vector<double> weights;
  std::vector<double> los_terms;
  std::vector<std::vector<Eigen::VectorXcd>> phi;  // [user][surface index in ris_ids]

  int dim() const { return static_cast<int>(ris_ids.size()) * elements + 1; }

  /// Lifted cost matrix of one served user. Together with the direct gain it
  /// reproduces the squared total gain of any unit-modulus stacked candidate.
  Eigen::MatrixXcd q_matrix(int user_index) const;

  /// min-max value (to be minimized): max_j -weights[j] * |gain_j(z)|^2 for a
  /// stacked unit-modulus candidate z (surface-major, element-minor).
  double minmax_objective(const Eigen::VectorXcd& z_stack) const;
};

/// Collects the SDP data for UAV at `q` serving `users` through `ris_set`.
/// Throws EmptyRisSet when the surface set is empty.
SdpInstance build_sdp(const Scenario& s, const Eigen::Vector2d& q,
                      const std::vector<int>& users, const std::vector<int>& ris_set);

struct SdpOptions {
  double tol = 1e-8;
  int max_iters = 200;
};

// Solution of the lifted relaxation: a PSD matrix with unit diagonal whose
// top-left block is the candidate covariance, plus the relaxation value.
struct PsdSolution {
  Eigen::MatrixXcd z_matrix;
  double objective = 0.0;  // relaxation value of the min-max problem
  double gap = 0.0;
  int iterations = 0;
};

/// Solves the unit-diagonal PSD relaxation of the min-max phase problem via
/// the epigraph reduction on the cone solver.
PsdSolution solve_passive_beamforming(const SdpInstance& inst, const SdpOptions& opt = {});

struct RandomizedPhases {
  Eigen::MatrixXd theta;   // rows follow inst.ris_ids
  double objective = 0.0;  // achieved min-max value, >= the relaxation value
};

/// Gaussian randomization: samples candidates with covariance z_matrix,
/// projects them to unit modulus and keeps the best. Deterministic in `seed`;
/// the draw stream is shared across trial counts so more trials never worsen
/// the result.
RandomizedPhases randomize_rank_one(const PsdSolution& psd, const SdpInstance& inst,
                                    int trials, std::uint64_t seed);

struct PhaseOptions {
  SdpOptions sdp;
  int randomization_trials = 200;
};

/// Per-UAV dispatch: closed-form alignment when exactly one user is served,
/// relaxation plus randomization otherwise. Returns new phase rows in
/// ris_set order (the current rows when there is nothing to optimize).
Eigen::MatrixXd optimize_uav_phases(const Scenario& s, const Eigen::Vector2d& q,
                                    const std::vector<int>& users,
                                    const std::vector<int>& ris_set,
                                    const Eigen::MatrixXd& current_rows,
                                    const PhaseOptions& opt, std::uint64_t seed);

}  // namespace uavlc
