#include <cmath>
#include <limits>
#include <cmath>

#include "uavlc/cones.hpp"
#include "uavlc/errors.hpp"

namespace uavlc::cones {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Slacks {
  VectorXd lin;        // b - a.x
  VectorXd hyp_u, hyp_v, hyp;  // factors and uv - c
  VectorXd quad;       // d.x + e - |Ax+b|^2
  bool strictly_feasible = true;
  int bad_kind = 0;    // 1 linear, 2 hyperbolic, 3 quadratic
  int bad_index = 0;
  double violation = 0.0;
};

Slacks eval_slacks(const ConvexSubproblem& p, const VectorXd& x) {
  Slacks s;
  s.lin.resize(p.linear.size());
  for (std::size_t i = 0; i < p.linear.size(); ++i) {
    s.lin(i) = p.linear[i].b - p.linear[i].a.dot(x);
    if (s.lin(i) <= 0.0 && s.strictly_feasible) {
      s.strictly_feasible = false;
      s.bad_kind = 1;
      s.bad_index = static_cast<int>(i);
      s.violation = -s.lin(i);
    }
  }
  s.hyp_u.resize(p.hyperbolic.size());
  s.hyp_v.resize(p.hyperbolic.size());
  s.hyp.resize(p.hyperbolic.size());
  for (std::size_t i = 0; i < p.hyperbolic.size(); ++i) {
    const auto& h = p.hyperbolic[i];
    s.hyp_u(i) = h.u.dot(x) + h.cu;
    s.hyp_v(i) = h.v.dot(x) + h.cv;
    s.hyp(i) = s.hyp_u(i) * s.hyp_v(i) - h.c;
    if ((s.hyp_u(i) <= 0.0 || s.hyp_v(i) <= 0.0 || s.hyp(i) <= 0.0) &&
        s.strictly_feasible) {
      s.strictly_feasible = false;
      s.bad_kind = 2;
      s.bad_index = static_cast<int>(i);
      s.violation = std::max({-s.hyp(i), -s.hyp_u(i), -s.hyp_v(i)});
    }
  }
  s.quad.resize(p.quad.size());
  for (std::size_t i = 0; i < p.quad.size(); ++i) {
    const auto& q = p.quad[i];
    s.quad(i) = q.d.dot(x) + q.e - (q.A * x + q.b).squaredNorm();
    if (s.quad(i) <= 0.0 && s.strictly_feasible) {
      s.strictly_feasible = false;
      s.bad_kind = 3;
      s.bad_index = static_cast<int>(i);
      s.violation = -s.quad(i);
    }
  }
  return s;
}

double barrier_value(const Slacks& s) {
  double phi = 0.0;
  for (int i = 0; i < s.lin.size(); ++i) phi -= std::log(s.lin(i));
  for (int i = 0; i < s.hyp.size(); ++i) phi -= std::log(s.hyp(i));
  for (int i = 0; i < s.quad.size(); ++i) phi -= std::log(s.quad(i));
  return phi;
}

// Smallest positive root of a*t^2 + b*t + c with c > 0, +inf when none.
double first_positive_root(double a, double b, double c) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a == 0.0) return b < 0.0 ? -c / b : inf;
  const double disc = b * b - 4.0 * a * c;
  if (a < 0.0) {
    // concave: a positive root always exists
    return (-b - std::sqrt(std::max(disc, 0.0))) / (2.0 * a);
  }
  if (disc < 0.0) return inf;
  const double r = (-b - std::sqrt(disc)) / (2.0 * a);
  return r > 0.0 ? r : inf;
}

// Supremum step along d keeping every slack positive. All slack functions
// are quadratics in the step length, so this is exact.
double max_feasible_step(const ConvexSubproblem& p, const Slacks& s,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
  double amax = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.linear.size(); ++i) {
    const double slope = p.linear[i].a.dot(d);
    if (slope > 0.0) amax = std::min(amax, s.lin(i) / slope);
  }
  for (std::size_t i = 0; i < p.hyperbolic.size(); ++i) {
    const auto& h = p.hyperbolic[i];
    const double ud = h.u.dot(d), vd = h.v.dot(d);
    amax = std::min(amax, first_positive_root(ud * vd,
                                              s.hyp_u(i) * vd + s.hyp_v(i) * ud,
                                              s.hyp(i)));
    if (ud < 0.0) amax = std::min(amax, -s.hyp_u(i) / ud);
    if (vd < 0.0) amax = std::min(amax, -s.hyp_v(i) / vd);
  }
  for (std::size_t i = 0; i < p.quad.size(); ++i) {
    const auto& q = p.quad[i];
    const Eigen::VectorXd ad = q.A * d;
    const double lin = q.d.dot(d) - 2.0 * (q.A * x + q.b).dot(ad);
    amax = std::min(amax, first_positive_root(-ad.squaredNorm(), lin, s.quad(i)));
  }
  return amax;
}

// Gradient and Hessian of the log barrier.
void barrier_derivatives(const ConvexSubproblem& p, const VectorXd& x, const Slacks& s,
                         VectorXd& grad, MatrixXd& hess) {
  const int n = p.n;
  grad.setZero(n);
  hess.setZero(n, n);
  for (std::size_t i = 0; i < p.linear.size(); ++i) {
    const VectorXd& a = p.linear[i].a;
    const double inv = 1.0 / s.lin(i);
    grad += inv * a;
    hess += (inv * inv) * a * a.transpose();
  }
  for (std::size_t i = 0; i < p.hyperbolic.size(); ++i) {
    const auto& h = p.hyperbolic[i];
    const double f = s.hyp(i);
    // grad f = v*u' + u*v', hess f = u v' + v u'
    const VectorXd gf = s.hyp_v(i) * h.u + s.hyp_u(i) * h.v;
    grad -= gf / f;
    hess += gf * gf.transpose() / (f * f);
    const MatrixXd cross = h.u * h.v.transpose();
    hess -= (cross + cross.transpose()) / f;
  }
  for (std::size_t i = 0; i < p.quad.size(); ++i) {
    const auto& q = p.quad[i];
    const double f = s.quad(i);
    const VectorXd r = q.A * x + q.b;
    const VectorXd gf = q.d - 2.0 * q.A.transpose() * r;
    grad -= gf / f;
    hess += gf * gf.transpose() / (f * f) + 2.0 * q.A.transpose() * q.A / f;
  }
}

}  // namespace

SubproblemResult solve_subproblem(const ConvexSubproblem& p, const VectorXd& start,
                                  double tol, int max_newton) {
  if (start.size() != p.n) {
    throw DomainError("solve_subproblem: start has wrong dimension");
  }
  for (std::size_t i = 0; i < p.hyperbolic.size(); ++i) {
    if (p.hyperbolic[i].c < 0.0) {
      throw DomainError("solve_subproblem: hyperbolic constant must be >= 0");
    }
  }
  {
    const Slacks s0 = eval_slacks(p, start);
    if (!s0.strictly_feasible) {
      static const char* kinds[] = {"", "linear", "hyperbolic", "quadratic"};
      throw Infeasible(std::string("solve_subproblem: start violates ") +
                       kinds[s0.bad_kind] + " constraint " +
                       std::to_string(s0.bad_index) + " by " +
                       std::to_string(s0.violation));
    }
  }

  const int m = p.constraint_count();
  VectorXd x = start;
  SubproblemResult out;
  if (m == 0) {
    // Nothing to center on; the problem is linear and must be solved by the
    // caller's constraints. Only a constant objective is meaningful here.
    out.x = x;
    out.objective = p.objective.dot(x);
    return out;
  }

  double t = std::max(1.0, m / (1.0 + std::abs(p.objective.dot(x))));
  const double mu = 20.0;
  VectorXd grad(p.n);
  MatrixXd hess(p.n, p.n);

  for (int outer = 0; outer < 80; ++outer) {
    // Center at the current barrier weight.
    for (int inner = 0; inner < 200; ++inner) {
      if (out.newton_steps >= max_newton) {
        throw SolverFailure("solve_subproblem: Newton budget exhausted",
                            out.newton_steps, m / t);
      }
      const Slacks s = eval_slacks(p, x);
      barrier_derivatives(p, x, s, grad, hess);
      VectorXd g = t * p.objective + grad;
      // Jacobi-preconditioned Newton system: the variables mix watts, meters
      // and unit gains, so the raw Hessian can be conditioned beyond what a
      // plain Cholesky tolerates. The tiny ridge keeps directions without any
      // barrier curvature (e.g. an idle UAV's position) from going singular.
      Eigen::VectorXd dscale =
          hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().cwiseMin(1e150);
      MatrixXd h = dscale.asDiagonal() * hess * dscale.asDiagonal();
      h.diagonal().array() += 1e-12;
      Eigen::LLT<MatrixXd> llt(h);
      if (llt.info() != Eigen::Success) {
        h.diagonal().array() += 1e-6;
        llt.compute(h);
        if (llt.info() != Eigen::Success) {
          throw SolverFailure("solve_subproblem: Hessian factorization failed",
                              out.newton_steps, m / t);
        }
      }
      const VectorXd dx =
          dscale.cwiseProduct(llt.solve(VectorXd(dscale.cwiseProduct(-g))));
      ++out.newton_steps;
      const double decrement2 = -g.dot(dx);
      if (!(decrement2 > 1e-9)) break;

      // Backtrack into the domain, then Armijo on the centering objective.
      // The test works on analytic differences (the linear part enters as
      // t * c.dx * alpha) so large objective values cannot cancel away the
      // decrease.
      const double phi0 = barrier_value(s);
      const double slope = t * p.objective.dot(dx);
      // Start just inside the exact distance to the boundary, then Armijo.
      double alpha = std::min(1.0, 0.995 * max_feasible_step(p, s, x, dx));
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        const VectorXd cand = x + alpha * dx;
        const Slacks cs = eval_slacks(p, cand);
        if (cs.strictly_feasible) {
          const double df = alpha * slope + (barrier_value(cs) - phi0);
          if (df <= -0.05 * alpha * decrement2) {
            x = cand;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;  // centered to machine precision
      if (alpha * dx.cwiseAbs().maxCoeff() <=
          1e-13 * (1.0 + x.cwiseAbs().maxCoeff())) {
        break;  // stalled at numerical resolution
      }
    }
    const double obj = p.objective.dot(x);
    if (m / t <= tol * (1.0 + std::abs(obj))) {
      const Slacks s = eval_slacks(p, x);
      barrier_derivatives(p, x, s, grad, hess);
      out.x = x;
      out.objective = obj;
      out.kkt_residual = (p.objective + grad / t).cwiseAbs().maxCoeff();
      return out;
    }
    t *= mu;
  }
  throw SolverFailure("solve_subproblem: barrier path did not converge",
                      out.newton_steps, m / t);
}

}  // namespace uavlc::cones
