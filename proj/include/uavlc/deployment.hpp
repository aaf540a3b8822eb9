#pragma once

#include <complex>
#include <vector>

#include "uavlc/types.hpp"

namespace uavlc {

/// Affine under-estimator of the squared separation |q_i - q_k|^2, tangent at
/// the reference pair.
double minorant_g0(const Eigen::Vector2d& qi, const Eigen::Vector2d& qk,
                   const Eigen::Vector2d& qi_ref, const Eigen::Vector2d& qk_ref);

/// Ratio of the reflected term of one surface to its UAV-side path loss,
/// evaluated at the reference position: the reflected contribution then
/// rewrites as kappa * h_ur_los near the reference. Throws ZeroPathLoss when
/// the UAV-side hop is dark at the reference.
std::complex<double> compute_kappa(const Scenario& s, const Eigen::Vector2d& q_ref,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta_row,
                                   int ris, int user);

/// Affine under-estimator of |h_direct + sum_l kappa_l h_l|^2, tangent at the
/// reference gains. `s_ref` is the complex total at the reference,
/// `h_direct`/`h_l` the candidate gain variables.
double minorant_g1(std::complex<double> s_ref, double h_direct,
                   const Eigen::Ref<const Eigen::VectorXcd>& kappas,
                   const Eigen::Ref<const Eigen::VectorXd>& h_reflected);

/// Affine under-estimator of c/h (tangent at h_ref > 0): bounds the squared
/// link distance that a candidate gain h still supports.
double minorant_g2(double h, double h_ref, double c);

/// Same minorant applied to the UAV->surface hop.
double minorant_g3(double h, double h_ref, double c);

struct ScaOptions {
  int max_iters = 50;
  double tol = 1e-6;
  double subproblem_tol = 1e-8;
  int subproblem_newton = 20000;
};

struct DeploymentResult {
  Eigen::Matrix2Xd deployment;
  Eigen::VectorXd powers;
  std::vector<double> objective_history;  // accepted totals, non-increasing
  int iterations = 0;
  bool converged = false;
  std::string failure;  // nonempty when the convex step solver gave up early
};

/// Successive convex approximation of the UAV placement: linearizes the
/// separation and gain constraints at the current iterate, solves the convex
/// step, and accepts it only if the true total power does not increase.
/// Requires a start that satisfies the separation constraints.
DeploymentResult optimize_deployment(const Scenario& s, const Eigen::Matrix2Xd& start,
                                     const Association& assoc, const PhaseMatrix& phases,
                                     const ScaOptions& opt = {});

}  // namespace uavlc
