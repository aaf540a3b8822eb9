#include <algorithm>
#include <cmath>
#include <limits>

#include "uavlc/cones.hpp"
#include "uavlc/errors.hpp"

namespace uavlc::cones {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Symmetric square root and inverse square root via eigendecomposition.
struct SymRoots {
  MatrixXd half;
  MatrixXd inv_half;
  MatrixXd inv;
  double min_eig = 0.0;
};

SymRoots sym_roots(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  SymRoots r;
  const VectorXd& ev = es.eigenvalues();
  r.min_eig = ev.minCoeff();
  VectorXd sq = ev.cwiseMax(0.0).cwiseSqrt();
  VectorXd isq(sq.size()), inv(sq.size());
  for (int i = 0; i < sq.size(); ++i) {
    isq(i) = sq(i) > 0.0 ? 1.0 / sq(i) : 0.0;
    inv(i) = ev(i) > 0.0 ? 1.0 / ev(i) : 0.0;
  }
  const MatrixXd& q = es.eigenvectors();
  r.half = q * sq.asDiagonal() * q.transpose();
  r.inv_half = q * isq.asDiagonal() * q.transpose();
  r.inv = q * inv.asDiagonal() * q.transpose();
  return r;
}

// Nesterov-Todd scaling point W: W S W = X.
MatrixXd nt_scaling(const MatrixXd& x, const MatrixXd& s) {
  const SymRoots sr = sym_roots(s);
  const MatrixXd t = sr.half * x * sr.half;
  const SymRoots tr = sym_roots(t);
  MatrixXd w = sr.inv_half * tr.half * sr.inv_half;
  return 0.5 * (w + w.transpose());
}

// Largest alpha in (0, 1] with x + alpha*dx PSD, damped by `frac`.
double step_to_boundary(const MatrixXd& x, const MatrixXd& dx, double frac) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd l = llt.matrixL();
  MatrixXd m = l.triangularView<Eigen::Lower>().solve(dx);
  m = l.triangularView<Eigen::Lower>().solve(MatrixXd(m.transpose()));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, frac / (-lmin));
}

}  // namespace

MatrixXd real_embedding(const Eigen::MatrixXcd& h) {
  const int n = static_cast<int>(h.rows());
  MatrixXd y(2 * n, 2 * n);
  y.topLeftCorner(n, n) = h.real();
  y.bottomRightCorner(n, n) = h.real();
  y.topRightCorner(n, n) = -h.imag();
  y.bottomLeftCorner(n, n) = h.imag();
  return y;
}

Eigen::MatrixXcd complex_from_embedding(const MatrixXd& y) {
  const int n = static_cast<int>(y.rows()) / 2;
  const MatrixXd re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  const MatrixXd im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  Eigen::MatrixXcd x(n, n);
  x.real() = re;
  x.imag() = im;
  return 0.5 * (x + x.adjoint());
}

BlockSdpResult solve_block_sdp(const BlockSdpForm& form, double tol, int max_iters) {
  const int nblocks = static_cast<int>(form.block_sizes.size());
  const int m = static_cast<int>(form.constraints.size());
  int ntotal = 0;
  for (int s : form.block_sizes) ntotal += s;

  auto materialize = [&](const std::vector<std::pair<int, MatrixXd>>& terms) {
    std::vector<MatrixXd> out(nblocks);
    for (int b = 0; b < nblocks; ++b)
      out[b] = MatrixXd::Zero(form.block_sizes[b], form.block_sizes[b]);
    for (const auto& [b, mat] : terms) out[b] += 0.5 * (mat + mat.transpose());
    return out;
  };

  const std::vector<MatrixXd> cost = materialize(form.cost);

  // Constraints indexed per block so the Schur complement only pairs
  // constraints that actually share a block.
  std::vector<std::vector<std::pair<int, MatrixXd>>> per_block(nblocks);
  for (int k = 0; k < m; ++k) {
    for (const auto& [b, mat] : form.constraints[k].terms) {
      per_block[b].emplace_back(k, 0.5 * (mat + mat.transpose()));
    }
  }
  VectorXd b_vec(m);
  for (int k = 0; k < m; ++k) b_vec(k) = form.constraints[k].rhs;

  // Scale-aware identity start.
  double cnorm = 0.0;
  for (const auto& cb : cost) cnorm += cb.squaredNorm();
  cnorm = std::sqrt(cnorm);
  double anorm = 1.0;
  for (const auto& pc : per_block)
    for (const auto& [k, mat] : pc) anorm = std::max(anorm, mat.norm());
  const double x0 = std::max(1.0, b_vec.size() ? b_vec.cwiseAbs().maxCoeff() / anorm : 1.0);
  const double s0 = std::max(1.0, cnorm);

  std::vector<MatrixXd> x(nblocks), s(nblocks);
  for (int b = 0; b < nblocks; ++b) {
    x[b] = x0 * MatrixXd::Identity(form.block_sizes[b], form.block_sizes[b]);
    s[b] = s0 * MatrixXd::Identity(form.block_sizes[b], form.block_sizes[b]);
  }
  VectorXd y = VectorXd::Zero(m);

  auto apply_a = [&](const std::vector<MatrixXd>& blocks) {
    VectorXd out = VectorXd::Zero(m);
    for (int b = 0; b < nblocks; ++b)
      for (const auto& [k, mat] : per_block[b])
        out(k) += (mat.array() * blocks[b].array()).sum();
    return out;
  };
  auto apply_at = [&](const VectorXd& yy) {
    std::vector<MatrixXd> out(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      out[b] = MatrixXd::Zero(form.block_sizes[b], form.block_sizes[b]);
      for (const auto& [k, mat] : per_block[b]) out[b] += yy(k) * mat;
    }
    return out;
  };

  const double bnorm = 1.0 + (m ? b_vec.cwiseAbs().maxCoeff() : 0.0);
  const double cnorm1 = 1.0 + cnorm;

  BlockSdpResult res;
  double best_err = std::numeric_limits<double>::infinity();
  BlockSdpResult best;
  std::vector<double> err_history;

  for (int iter = 0; iter <= max_iters; ++iter) {
    // Residuals and duality measures.
    VectorXd rp = b_vec - apply_a(x);
    std::vector<MatrixXd> at_y = apply_at(y);
    std::vector<MatrixXd> rd(nblocks);
    double rdnorm = 0.0;
    double mu = 0.0;
    for (int b = 0; b < nblocks; ++b) {
      rd[b] = cost[b] - s[b] - at_y[b];
      rdnorm += rd[b].squaredNorm();
      mu += (x[b].array() * s[b].array()).sum();
    }
    rdnorm = std::sqrt(rdnorm);
    mu /= std::max(1, ntotal);

    double pobj = 0.0;
    for (int b = 0; b < nblocks; ++b) pobj += (cost[b].array() * x[b].array()).sum();
    const double dobj = b_vec.dot(y);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pinf = (m ? rp.cwiseAbs().maxCoeff() : 0.0) / bnorm;
    const double dinf = rdnorm / cnorm1;
    const double err = std::max({relgap, pinf, dinf});
    err_history.push_back(err);
    if (err < best_err) {
      best_err = err;
      best.primal = x;
      best.dual_slack = s;
      best.dual = y;
      best.primal_objective = pobj;
      best.dual_objective = dobj;
      best.gap = relgap;
      best.iterations = iter;
    }

    if (err <= tol) {
      res.primal = x;
      res.dual_slack = s;
      res.dual = y;
      res.primal_objective = pobj;
      res.dual_objective = dobj;
      res.gap = relgap;
      res.iterations = iter;
      return res;
    }
    // A degenerate optimal face can stall the error just above the target;
    // once progress flattens at a still-tiny level, the best iterate is the
    // answer (its achieved gap is reported, not the requested one).
    const double loose = std::max(1e3 * tol, 1e-6);
    if (iter >= 30 && best_err <= loose &&
        best_err > 0.9 * err_history[err_history.size() - 16]) {
      return best;
    }
    if (iter == max_iters) break;

    // NT scaling and Schur complement M_kl = <A_k, W A_l W>.
    std::vector<MatrixXd> w(nblocks), sinv(nblocks);
    for (int b = 0; b < nblocks; ++b) {
      w[b] = nt_scaling(x[b], s[b]);
      sinv[b] = sym_roots(s[b]).inv;
    }
    MatrixXd schur = MatrixXd::Zero(m, m);
    for (int b = 0; b < nblocks; ++b) {
      for (const auto& [l, al] : per_block[b]) {
        const MatrixXd g = w[b] * al * w[b];
        for (const auto& [k, ak] : per_block[b]) {
          schur(k, l) += (ak.array() * g.array()).sum();
        }
      }
    }
    schur = 0.5 * (schur + schur.transpose());
    Eigen::LDLT<MatrixXd> fact(schur +
                               1e-13 * std::max(1.0, schur.diagonal().maxCoeff()) *
                                   MatrixXd::Identity(m, m));
    if (fact.info() != Eigen::Success) {
      throw SolverFailure("solve_block_sdp: Schur factorization failed", iter, err);
    }

    // rhs(sigma) = b - sigma*mu*A(S^-1) + A(W Rd W)
    VectorXd a_sinv = apply_a(sinv);
    std::vector<MatrixXd> wrdw(nblocks);
    for (int b = 0; b < nblocks; ++b) wrdw[b] = w[b] * rd[b] * w[b];
    const VectorXd a_wrdw = apply_a(wrdw);

    auto directions = [&](double sigma, std::vector<MatrixXd>& dx,
                          std::vector<MatrixXd>& ds, VectorXd& dy) {
      dy = fact.solve(b_vec - sigma * mu * a_sinv + a_wrdw);
      const std::vector<MatrixXd> at_dy = apply_at(dy);
      dx.resize(nblocks);
      ds.resize(nblocks);
      for (int b = 0; b < nblocks; ++b) {
        ds[b] = rd[b] - at_dy[b];
        MatrixXd t = sigma * mu * sinv[b] - x[b] - w[b] * ds[b] * w[b];
        dx[b] = 0.5 * (t + t.transpose());
      }
    };

    // Predictor to pick the centering weight, then the actual step.
    std::vector<MatrixXd> dx, ds;
    VectorXd dy;
    directions(0.0, dx, ds, dy);
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nblocks; ++b) {
      ap = std::min(ap, step_to_boundary(x[b], dx[b], 0.98));
      ad = std::min(ad, step_to_boundary(s[b], ds[b], 0.98));
    }
    double mu_aff = 0.0;
    for (int b = 0; b < nblocks; ++b) {
      mu_aff += ((x[b] + ap * dx[b]).array() * (s[b] + ad * ds[b]).array()).sum();
    }
    mu_aff /= std::max(1, ntotal);
    double sigma = std::pow(std::max(0.0, mu_aff / std::max(mu, 1e-300)), 3.0);
    sigma = std::clamp(sigma, 1e-6, 0.99);

    directions(sigma, dx, ds, dy);
    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nblocks; ++b) {
      ap = std::min(ap, step_to_boundary(x[b], dx[b], 0.98));
      ad = std::min(ad, step_to_boundary(s[b], ds[b], 0.98));
    }

    // Guard against rounding pushing an iterate off the cone.
    for (int attempt = 0; attempt < 30; ++attempt) {
      bool ok = true;
      for (int b = 0; b < nblocks && ok; ++b) {
        ok = Eigen::LLT<MatrixXd>(x[b] + ap * dx[b]).info() == Eigen::Success &&
             Eigen::LLT<MatrixXd>(s[b] + ad * ds[b]).info() == Eigen::Success;
      }
      if (ok) break;
      ap *= 0.5;
      ad *= 0.5;
    }
    for (int b = 0; b < nblocks; ++b) {
      x[b] += ap * dx[b];
      s[b] += ad * ds[b];
    }
    y += ad * dy;
  }

  if (best_err <= std::max(1e3 * tol, 1e-6)) return best;
  throw SolverFailure("solve_block_sdp: tolerance not reached in " +
                          std::to_string(max_iters) + " iterations",
                      max_iters, best_err);
}

SdpResult solve_sdp(const SdpStandardForm& form, double tol, int max_iters) {
  const int n = form.dimension;
  BlockSdpForm blk;
  blk.block_sizes = {2 * n};
  // <T(A)/2, T(X)> = tr(A X) keeps objective and rhs in the complex scale.
  blk.cost.emplace_back(0, 0.5 * real_embedding(form.cost));
  for (const auto& [a, b] : form.equalities) {
    BlockSdpForm::Constraint c;
    c.terms.emplace_back(0, 0.5 * real_embedding(a));
    c.rhs = b;
    blk.constraints.push_back(std::move(c));
  }
  BlockSdpResult r = solve_block_sdp(blk, tol, max_iters);

  SdpResult out;
  out.primal = complex_from_embedding(r.primal[0]);
  out.dual = r.dual;
  out.primal_objective = r.primal_objective;
  out.dual_objective = r.dual_objective;
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

}  // namespace uavlc::cones
