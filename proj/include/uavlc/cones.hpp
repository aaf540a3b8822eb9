#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace uavlc::cones {

// ---------------------------------------------------------------------------
// Semidefinite programming
// ---------------------------------------------------------------------------

// Standard form over one complex Hermitian matrix variable:
//   minimize    tr(C X)
//   subject to  tr(A_k X) = b_k,   X PSD.
struct SdpStandardForm {
  Eigen::MatrixXcd cost;
  std::vector<std::pair<Eigen::MatrixXcd, double>> equalities;
  int dimension = 0;
};

struct SdpResult {
  Eigen::MatrixXcd primal;
  Eigen::VectorXd dual;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // relative duality gap at exit
  int iterations = 0;
};

/// Primal-dual interior-point solve of a Hermitian standard-form SDP via the
/// real symmetric embedding. Throws SolverFailure when the iteration cap is
/// reached before the tolerance.
SdpResult solve_sdp(const SdpStandardForm& form, double tol = 1e-8, int max_iters = 200);

// Block-diagonal real symmetric standard form. The variable is
// X = blkdiag(X_0, ..., X_B-1) with X_b a symmetric block of size
// block_sizes[b]; cost and constraints list only the blocks they touch.
struct BlockSdpForm {
  std::vector<int> block_sizes;
  std::vector<std::pair<int, Eigen::MatrixXd>> cost;
  struct Constraint {
    std::vector<std::pair<int, Eigen::MatrixXd>> terms;
    double rhs = 0.0;
  };
  std::vector<Constraint> constraints;
};

struct BlockSdpResult {
  std::vector<Eigen::MatrixXd> primal;      // X blocks
  std::vector<Eigen::MatrixXd> dual_slack;  // S blocks
  Eigen::VectorXd dual;                     // y
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// Infeasible-start primal-dual path following with Nesterov-Todd scaling and
/// a Mehrotra-style adaptive centering parameter. Deterministic.
BlockSdpResult solve_block_sdp(const BlockSdpForm& form, double tol = 1e-8,
                               int max_iters = 200);

/// Real symmetric embedding of a Hermitian matrix: [[Re, -Im], [Im, Re]].
Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd& h);

/// Inverse of real_embedding, averaging out the embedding symmetry.
Eigen::MatrixXcd complex_from_embedding(const Eigen::MatrixXd& y);

// ---------------------------------------------------------------------------
// Smooth convex subproblems (deployment step)
// ---------------------------------------------------------------------------

// minimize objective . x over three constraint families:
//   linear:      a.x <= b
//   hyperbolic:  (u.x + cu) * (v.x + cv) >= c   with c >= 0 and both factors > 0
//   quadratic:   |A x + b|^2 <= d.x + e
struct ConvexSubproblem {
  int n = 0;
  std::vector<std::string> names;  // optional variable names for diagnostics
  Eigen::VectorXd objective;

  struct Linear {
    Eigen::VectorXd a;
    double b = 0.0;
  };
  struct Hyperbolic {
    Eigen::VectorXd u;
    double cu = 0.0;
    Eigen::VectorXd v;
    double cv = 0.0;
    double c = 0.0;
  };
  struct QuadUnderLinear {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd d;
    double e = 0.0;
  };

  std::vector<Linear> linear;
  std::vector<Hyperbolic> hyperbolic;
  std::vector<QuadUnderLinear> quad;

  int constraint_count() const {
    return static_cast<int>(linear.size() + hyperbolic.size() + quad.size());
  }
};

struct SubproblemResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

/// Log-barrier Newton path following from a strictly feasible start: the
/// hyperbolic constraints use the rotated-cone barrier -ln(uv - c).
/// Throws Infeasible when the start is not strictly feasible (the message
/// names the constraint) and SolverFailure when progress stalls.
SubproblemResult solve_subproblem(const ConvexSubproblem& p, const Eigen::VectorXd& start,
                                  double tol = 1e-8, int max_newton = 20000);

}  // namespace uavlc::cones
