#include "uavlc/deployment.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "uavlc/channel.hpp"
#include "uavlc/cones.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double minorant_g0(const Eigen::Vector2d& qi, const Eigen::Vector2d& qk,
                   const Eigen::Vector2d& qi_ref, const Eigen::Vector2d& qk_ref) {
  const Eigen::Vector2d dref = qi_ref - qk_ref;
  return 2.0 * dref.dot(qi - qk) - dref.squaredNorm();
}

std::complex<double> compute_kappa(const Scenario& s, const Eigen::Vector2d& q_ref,
                                   const Eigen::Ref<const Eigen::VectorXd>& theta_row,
                                   int ris, int user) {
  const double h_ur = los_gain(s.uav_position(q_ref), s.ris_position(ris), s.vlc);
  if (h_ur <= 0.0) {
    throw ZeroPathLoss("compute_kappa: UAV->surface hop is dark at the reference");
  }
  return reflected_term(s, q_ref, theta_row, ris, user) / h_ur;
}

double minorant_g1(std::complex<double> s_ref, double h_direct,
                   const Eigen::Ref<const Eigen::VectorXcd>& kappas,
                   const Eigen::Ref<const Eigen::VectorXd>& h_reflected) {
  std::complex<double> total(h_direct, 0.0);
  for (int l = 0; l < kappas.size(); ++l) total += kappas(l) * h_reflected(l);
  return 2.0 * std::real(std::conj(s_ref) * total) - std::norm(s_ref);
}

double minorant_g2(double h, double h_ref, double c) {
  return c * (2.0 * h_ref - h) / (h_ref * h_ref);
}

double minorant_g3(double h, double h_ref, double c) { return minorant_g2(h, h_ref, c); }

namespace {

// One served (uav, user) pair at the current iterate.
struct PairState {
  int uav = 0, user = 0;
  double floor = 0.0;                  // A_j
  double gain_ref = 0.0;               // |s_ref|
  std::complex<double> s_ref;          // direct + reflected reconstruction
  double h_los_ref = 0.0;              // direct Lambertian gain (0: link dark)
  double dist2_ref = 0.0;              // squared 3-D distance
  std::vector<int> ris;                // surfaces with a live UAV-side hop
  std::vector<std::complex<double>> kappa;
  int var_g = -1, var_a = -1;          // aggregate / direct gain variables
};

struct LinkState {  // UAV -> surface hop with a variable in the step problem
  int uav = 0, ris = 0;
  double h_ref = 0.0;
  double dist2_ref = 0.0;
  int var_b = -1;
};

struct Iterate {
  std::vector<PairState> pairs;
  std::vector<LinkState> links;
  Eigen::VectorXd powers;  // true per-UAV requirement at the iterate
  double total = 0.0;
};

Iterate build_iterate(const Scenario& s, const Eigen::Matrix2Xd& q,
                      const Association& assoc, const PhaseMatrix& phases) {
  Iterate it;
  it.powers = Eigen::VectorXd::Zero(s.uav_count);
  for (int i = 0; i < s.uav_count; ++i) {
    // Live UAV->surface hops of this UAV, shared by all its served users.
    std::vector<int> live;
    for (int l = 0; l < s.ris_count(); ++l) {
      if (assoc.ris_assoc(i, l) == 0) continue;
      if (los_gain(s.uav_position(q.col(i)), s.ris_position(l), s.vlc) > 0.0) {
        live.push_back(l);
      }
    }
    bool any_pair = false;
    for (int j = 0; j < s.user_count(); ++j) {
      if (assoc.user_assoc(i, j) == 0) continue;
      const double floor = power_floor(s, j);
      if (floor == 0.0) continue;
      PairState p;
      p.uav = i;
      p.user = j;
      p.floor = floor;
      p.h_los_ref = los_gain(s.uav_position(q.col(i)), s.user_position(j), s.vlc);
      p.dist2_ref = (s.uav_position(q.col(i)) - s.user_position(j)).squaredNorm();
      p.s_ref = std::complex<double>(p.h_los_ref, 0.0);
      for (int l : live) {
        const std::complex<double> kap =
            compute_kappa(s, q.col(i), phases.theta.row(l), l, j);
        const double h_ur = los_gain(s.uav_position(q.col(i)), s.ris_position(l), s.vlc);
        p.ris.push_back(l);
        p.kappa.push_back(kap);
        p.s_ref += kap * h_ur;
      }
      p.gain_ref = std::abs(p.s_ref);
      if (p.gain_ref <= 0.0) {
        throw InfeasibleChannel("optimize_deployment: served user " + std::to_string(j) +
                                " has zero gain at the current iterate");
      }
      it.powers(i) = std::max(it.powers(i), p.floor / p.gain_ref);
      it.pairs.push_back(std::move(p));
      any_pair = true;
    }
    if (any_pair) {
      for (int l : live) {
        LinkState ls;
        ls.uav = i;
        ls.ris = l;
        ls.h_ref = los_gain(s.uav_position(q.col(i)), s.ris_position(l), s.vlc);
        ls.dist2_ref = (s.uav_position(q.col(i)) - s.ris_position(l)).squaredNorm();
        it.links.push_back(ls);
      }
    }
  }
  it.total = it.powers.sum();
  return it;
}

Eigen::VectorXd true_powers(const Scenario& s, const Eigen::Matrix2Xd& q,
                            const Association& assoc, const PhaseMatrix& phases) {
  Eigen::VectorXd p(s.uav_count);
  for (int i = 0; i < s.uav_count; ++i) {
    p(i) = required_power_or_inf(s, q, phases, assoc, i);
  }
  return p;
}

}  // namespace

DeploymentResult optimize_deployment(const Scenario& s, const Eigen::Matrix2Xd& start,
                                     const Association& assoc, const PhaseMatrix& phases,
                                     const ScaOptions& opt) {
  DeploymentResult res;
  res.deployment = start;

  const int d = s.uav_count;
  Eigen::Matrix2Xd q = start;
  Iterate it = build_iterate(s, q, assoc, phases);
  res.objective_history.push_back(it.total);

  if (it.pairs.empty()) {  // nobody to serve: positions are irrelevant
    res.powers = it.powers;
    res.converged = true;
    return res;
  }

  // UAVs without served demand have no influence on the objective; their
  // positions stay frozen and act as fixed obstacles in the separation
  // constraints. This keeps the step problem free of unconstrained drift.
  std::vector<bool> active(d, false);
  for (const auto& pr : it.pairs) active[pr.uav] = true;

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    // ----- assemble the convex step problem in scaled variables -----
    // Gains are expressed relative to their reference value (so every gain
    // variable starts at one) and link distances relative to the reference
    // distance; this keeps the Newton system well conditioned despite the
    // ~1e-6 physical gain scale.
    cones::ConvexSubproblem sp;
    std::vector<int> qxv(d, -1), qyv(d, -1), pwv(d, -1);
    int nv = 0;
    for (int i = 0; i < d; ++i) {
      if (!active[i]) continue;
      qxv[i] = nv++;
      qyv[i] = nv++;
      pwv[i] = nv++;
    }
    auto qx = [&](int i) { return qxv[i]; };
    auto qy = [&](int i) { return qyv[i]; };
    auto pw = [&](int i) { return pwv[i]; };
    for (auto& pr : it.pairs) {
      pr.var_g = nv++;
      pr.var_a = pr.h_los_ref > 0.0 ? nv++ : -1;
    }
    for (auto& ln : it.links) ln.var_b = nv++;
    sp.n = nv;
    sp.objective = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < d; ++i) {
      if (active[i]) sp.objective(pw(i)) = 1.0;
    }

    const double hvar = s.uav_altitude;
    const double zr = s.uav_altitude - s.ris_height;
    const double p_scale = std::max(it.total, 1e-12);  // power variables in these units

    for (const auto& pr : it.pairs) {
      // transmit power covers the scaled aggregate gain
      cones::ConvexSubproblem::Hyperbolic hy;
      hy.u = Eigen::VectorXd::Zero(nv);
      hy.u(pw(pr.uav)) = 1.0;
      hy.v = Eigen::VectorXd::Zero(nv);
      hy.v(pr.var_g) = 1.0;
      hy.c = pr.floor / (pr.gain_ref * p_scale);
      sp.hyperbolic.push_back(std::move(hy));

      // squared aggregate gain under its tangent minorant
      cones::ConvexSubproblem::QuadUnderLinear g1;
      g1.A = Eigen::MatrixXd::Zero(1, nv);
      g1.A(0, pr.var_g) = 1.0;
      g1.b = Eigen::VectorXd::Zero(1);
      g1.d = Eigen::VectorXd::Zero(nv);
      const double inv_ref2 = 1.0 / std::norm(pr.s_ref);
      if (pr.var_a >= 0) {
        g1.d(pr.var_a) =
            2.0 * std::real(std::conj(pr.s_ref)) * pr.h_los_ref * inv_ref2;
      }
      for (std::size_t r = 0; r < pr.ris.size(); ++r) {
        const auto& ln = *std::find_if(it.links.begin(), it.links.end(), [&](auto& l) {
          return l.uav == pr.uav && l.ris == pr.ris[r];
        });
        g1.d(ln.var_b) +=
            2.0 * std::real(std::conj(pr.s_ref) * pr.kappa[r]) * ln.h_ref * inv_ref2;
      }
      g1.e = -1.0;
      sp.quad.push_back(std::move(g1));

      // direct-link distance supported by the direct gain variable
      if (pr.var_a >= 0) {
        cones::ConvexSubproblem::QuadUnderLinear g2;
        const double dref = std::sqrt(pr.dist2_ref);
        g2.A = Eigen::MatrixXd::Zero(2, nv);
        g2.A(0, qx(pr.uav)) = 1.0 / dref;
        g2.A(1, qy(pr.uav)) = 1.0 / dref;
        g2.b = -s.users.col(pr.user) / dref;
        g2.d = Eigen::VectorXd::Zero(nv);
        g2.d(pr.var_a) = -1.0;
        g2.e = 2.0 - hvar * hvar / pr.dist2_ref;
        sp.quad.push_back(std::move(g2));
      }

      // keep the aggregate gain variable meaningfully positive
      cones::ConvexSubproblem::Linear lo;
      lo.a = Eigen::VectorXd::Zero(nv);
      lo.a(pr.var_g) = -1.0;
      lo.b = -1e-12 / pr.gain_ref;
      sp.linear.push_back(std::move(lo));

      // physical gains cannot go negative
      if (pr.var_a >= 0) {
        cones::ConvexSubproblem::Linear nn;
        nn.a = Eigen::VectorXd::Zero(nv);
        nn.a(pr.var_a) = -1.0;
        nn.b = 0.0;
        sp.linear.push_back(std::move(nn));
      }
    }

    for (const auto& ln : it.links) {
      cones::ConvexSubproblem::QuadUnderLinear g3;
      const double dref = std::sqrt(ln.dist2_ref);
      g3.A = Eigen::MatrixXd::Zero(2, nv);
      g3.A(0, qx(ln.uav)) = 1.0 / dref;
      g3.A(1, qy(ln.uav)) = 1.0 / dref;
      g3.b = -s.ris_list.col(ln.ris) / dref;
      g3.d = Eigen::VectorXd::Zero(nv);
      g3.d(ln.var_b) = -1.0;
      g3.e = 2.0 - zr * zr / ln.dist2_ref;
      sp.quad.push_back(std::move(g3));

      cones::ConvexSubproblem::Linear nn;
      nn.a = Eigen::VectorXd::Zero(nv);
      nn.a(ln.var_b) = -1.0;
      nn.b = 0.0;
      sp.linear.push_back(std::move(nn));
    }

    // linearized pairwise separation, scaled by d_min^2; frozen UAVs enter
    // as constants on the right-hand side
    const double dmin2 = s.min_separation * s.min_separation;
    for (int i = 0; i < d; ++i) {
      for (int k = i + 1; k < d; ++k) {
        if (dmin2 == 0.0 || (!active[i] && !active[k])) continue;
        const Eigen::Vector2d dref = q.col(i) - q.col(k);
        cones::ConvexSubproblem::Linear sep;
        sep.a = Eigen::VectorXd::Zero(nv);
        sep.b = -(dmin2 + dref.squaredNorm()) / dmin2;
        if (active[i]) {
          sep.a(qx(i)) = -2.0 * dref.x() / dmin2;
          sep.a(qy(i)) = -2.0 * dref.y() / dmin2;
        } else {
          sep.b += 2.0 * dref.dot(q.col(i)) / dmin2;
        }
        if (active[k]) {
          sep.a(qx(k)) = 2.0 * dref.x() / dmin2;
          sep.a(qy(k)) = 2.0 * dref.y() / dmin2;
        } else {
          sep.b -= 2.0 * dref.dot(q.col(k)) / dmin2;
        }
        // A start sitting exactly on the separation boundary needs a hair of
        // room for the barrier; the relaxation is far below the 1e-6
        // feasibility tolerance.
        const double slack_at_start = dref.squaredNorm() / dmin2 - 1.0;
        if (slack_at_start < 1e-9) sep.b += (1e-9 - slack_at_start);
        sp.linear.push_back(std::move(sep));
      }
    }
    for (int i = 0; i < d; ++i) {
      if (!active[i]) continue;
      cones::ConvexSubproblem::Linear pos;
      pos.a = Eigen::VectorXd::Zero(nv);
      pos.a(pw(i)) = -1.0;
      pos.b = 0.0;
      sp.linear.push_back(std::move(pos));
    }

    // strictly interior start: inflate the power, deflate the gains. The
    // margins are generous so the barrier does not start in a sharp corner;
    // they only move the start, not the step optimum.
    const double dg = 5e-3, da = 2.5e-3, dp = 1.5e-2;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nv);
    // Iterates often sit exactly on the separation boundary; give the start a
    // hair of room by pushing tight pairs apart (the constraints themselves
    // stay anchored at the untouched reference).
    Eigen::Matrix2Xd q0 = q;
    for (int round = 0; round < 8; ++round) {
      bool tight = false;
      for (int i = 0; i < d; ++i) {
        for (int k = i + 1; k < d; ++k) {
          const Eigen::Vector2d delta = q0.col(i) - q0.col(k);
          const double dist = delta.norm();
          const double want = s.min_separation * (1.0 + 5e-5);
          if (dist > 1e-12 && dist < want) {
            const Eigen::Vector2d push = delta / dist * (want - dist) * 0.5;
            q0.col(i) += push;
            q0.col(k) -= push;
            tight = true;
          }
        }
      }
      if (!tight) break;
    }
    for (int i = 0; i < d; ++i) {
      if (!active[i]) continue;
      x0(qx(i)) = q0(0, i);
      x0(qy(i)) = q0(1, i);
      x0(pw(i)) = std::max(it.powers(i) * (1.0 + dp) / p_scale, 1e-9);
    }
    for (const auto& pr : it.pairs) {
      x0(pr.var_g) = 1.0 - dg;
      if (pr.var_a >= 0) x0(pr.var_a) = 1.0 - da;
    }
    for (const auto& ln : it.links) x0(ln.var_b) = 1.0 - da;

    cones::SubproblemResult step;
    try {
      step = cones::solve_subproblem(sp, x0, opt.subproblem_tol, opt.subproblem_newton);
    } catch (const SolverFailure& e) {
      res.failure = std::string(e.what()) + " (step " + std::to_string(iter) +
                    ", residual " + std::to_string(e.residual) + ")";
      break;
    }

    Eigen::Matrix2Xd q_new(2, d);
    for (int i = 0; i < d; ++i) {
      q_new.col(i) = active[i] ? Eigen::Vector2d(step.x(qx(i)), step.x(qy(i)))
                               : Eigen::Vector2d(q.col(i));
    }

    const Eigen::VectorXd p_new = true_powers(s, q_new, assoc, phases);
    const double total_new = p_new.sum();
    if (!(total_new <= it.total * (1.0 + 1e-12))) {
      // the frozen-angle approximation overshot; keep the incumbent
      res.converged = true;
      break;
    }
    const double drop = it.total - total_new;
    q = q_new;
    it = build_iterate(s, q, assoc, phases);
    res.objective_history.push_back(it.total);
    res.iterations = iter + 1;
    if (drop <= opt.tol * std::max(it.total, 1e-300)) {
      res.converged = true;
      break;
    }
  }
  if (res.iterations == opt.max_iters) res.converged = true;

  res.deployment = q;
  res.powers = it.powers;
  if (res.powers.size() == 0) res.powers = Eigen::VectorXd::Zero(d);
  return res;
}

}  // namespace uavlc
