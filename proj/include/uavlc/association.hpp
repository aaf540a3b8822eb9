#pragma once

#include <cstdint>

#include "uavlc/phases.hpp"
#include "uavlc/types.hpp"

namespace uavlc {

// How candidate associations are priced during association search.
//   Keep:            gains evaluated at the given phase matrix as-is.
//   AlignSingleUser: UAVs serving exactly one user get closed-form aligned
//                    phases, everyone else keeps the given matrix. Cheap and
//                    deterministic, shared with the brute-force oracle.
//   FullReoptimize:  alignment or relaxation+randomization per UAV.
enum class PhasePolicy { Keep, AlignSingleUser, FullReoptimize };

struct AssociationEval {
  Eigen::VectorXd powers;
  Eigen::MatrixXd theta;  // phase matrix realizing the quoted powers
  double total = 0.0;     // +inf when some served user has zero gain
};

/// Prices one candidate association under a phase policy.
AssociationEval evaluate_association(const Scenario& s, const Eigen::Matrix2Xd& q,
                                     const Eigen::MatrixXd& base_theta,
                                     const Eigen::MatrixXi& user_assoc,
                                     const Eigen::MatrixXi& ris_assoc, PhasePolicy policy,
                                     const PhaseOptions& opt = {}, std::uint64_t seed = 0);

// Multipliers of the relaxed user-association problem. Row sums stay at or
// below one so the inner power minimization remains bounded.
struct UserDualState {
  Eigen::MatrixXd beta;  // D x U, >= 0
  double rho0 = 0.1;
  int iteration = 0;
};

/// Inner minimizer of the relaxed problem: user j goes to the UAV with the
/// smallest beta-weighted power coefficient, ties to the lowest index.
/// Throws NoCoverage when some user has zero gain to every UAV.
Eigen::MatrixXi user_assoc_step(const UserDualState& dual, const Eigen::MatrixXd& gains,
                                const Eigen::VectorXd& floors);

/// Projected subgradient update of beta (residuals are scaled by power_scale);
/// rows exceeding unit sum are renormalized.
void user_beta_update(UserDualState& dual, const Eigen::MatrixXi& user_assoc,
                      const Eigen::VectorXd& powers, const Eigen::MatrixXd& gains,
                      const Eigen::VectorXd& floors, double power_scale);

struct DualOptions {
  int iterations = 500;
  double rho0 = 0.1;
};

struct UserAssocResult {
  Eigen::MatrixXi user_assoc;
  Eigen::VectorXd powers;
  double total = 0.0;
  int iterations = 0;
};

/// Dual-decomposition user association at fixed deployment, phases and
/// surface assignment. Tracks and returns the best integer association seen.
UserAssocResult optimize_user_association(const Scenario& s, const Eigen::Matrix2Xd& q,
                                          const PhaseMatrix& phases,
                                          const Eigen::MatrixXi& ris_assoc,
                                          const DualOptions& opt = {});

// Expansion coefficients of the squared aggregate gain as a multilinear
// polynomial in one UAV's surface-assignment bits: a constant, a linear and
// a pairwise term. c_lv is strictly lower triangular (l > v).
struct RisCoefficients {
  double c0 = 0.0;
  Eigen::VectorXd c_l;
  Eigen::MatrixXd c_lv;
};

RisCoefficients ris_coefficients(const Scenario& s, const Eigen::Vector2d& q,
                                 const PhaseMatrix& phases, int user);

struct RisAssocResult {
  Eigen::MatrixXi ris_assoc;
  Eigen::VectorXd powers;
  Eigen::MatrixXd theta;
  double total = 0.0;
};

/// Surface association by the dual subgradient method on the linearized
/// product form. Integer candidates generated along the way are priced with
/// the AlignSingleUser policy; the best one (never worse than `current`) is
/// returned.
RisAssocResult ris_dual_solve(const Scenario& s, const Eigen::Matrix2Xd& q,
                              const PhaseMatrix& phases, const Eigen::MatrixXi& user_assoc,
                              const Eigen::MatrixXi& current, const DualOptions& opt = {});

/// Greedy surface association: starting from no assignment, places one
/// surface at a time on the UAV that minimizes the total power under the
/// given pricing policy. Returns `current` when greedy cannot beat it.
RisAssocResult ris_greedy(const Scenario& s, const Eigen::Matrix2Xd& q,
                          const PhaseMatrix& phases, const Eigen::MatrixXi& user_assoc,
                          const Eigen::MatrixXi& current,
                          PhasePolicy policy = PhasePolicy::AlignSingleUser,
                          const PhaseOptions& opt = {}, std::uint64_t seed = 0);

}  // namespace uavlc
