#include "uavlc/association.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "uavlc/channel.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Everything the association searches need, precomputed once per
// (deployment, base phases): direct gains, hop path losses and the reflected
// terms at the given phase rows.
struct Tables {
  Eigen::MatrixXd h_los;                 // D x U
  Eigen::MatrixXd h_ur;                  // D x L
  Eigen::MatrixXd h_rg;                  // L x U
  std::vector<Eigen::MatrixXcd> r_keep;  // per UAV: L x U reflected terms
  Eigen::VectorXd floors;                // per user
};

Tables build_tables(const Scenario& s, const Eigen::Matrix2Xd& q,
                    const Eigen::MatrixXd& theta) {
  const int d = s.uav_count, u = s.user_count(), L = s.ris_count();
  Tables t;
  t.h_los.resize(d, u);
  t.h_ur.resize(d, L);
  t.h_rg.resize(L, u);
  t.r_keep.assign(d, Eigen::MatrixXcd::Zero(L, u));
  t.floors.resize(u);
  for (int j = 0; j < u; ++j) t.floors(j) = power_floor(s, j);
  PhaseMatrix pm;
  pm.theta = theta;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < u; ++j) {
      t.h_los(i, j) = los_gain(s.uav_position(q.col(i)), s.user_position(j), s.vlc);
    }
    for (int l = 0; l < L; ++l) {
      t.h_ur(i, l) = los_gain(s.uav_position(q.col(i)), s.ris_position(l), s.vlc);
      for (int j = 0; j < u; ++j) {
        t.r_keep[i](l, j) = reflected_term(s, q.col(i), theta.row(l), l, j);
      }
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int j = 0; j < u; ++j) {
      t.h_rg(l, j) = los_gain(s.ris_position(l), s.user_position(j), s.vlc);
    }
  }
  return t;
}

// Gain of (uav, user) under a candidate surface row, pricing single-user
// UAVs with coherent alignment when requested.
double priced_gain(const Tables& t, const Scenario& s, const Eigen::MatrixXi& m, int i,
                   int j, bool aligned) {
  if (aligned) {
    double g = t.h_los(i, j);
    for (int l = 0; l < s.ris_count(); ++l) {
      if (m(i, l)) g += s.ris_elements * t.h_ur(i, l) * t.h_rg(l, j);
    }
    return g;
  }
  std::complex<double> g(t.h_los(i, j), 0.0);
  for (int l = 0; l < s.ris_count(); ++l) {
    if (m(i, l)) g += t.r_keep[i](l, j);
  }
  return std::abs(g);
}

// Total power of a candidate association under the Keep/AlignSingleUser
// policies; +inf when some served user with a positive floor has zero gain.
double priced_total(const Tables& t, const Scenario& s, const Eigen::MatrixXi& u,
                    const Eigen::MatrixXi& m, PhasePolicy policy,
                    Eigen::VectorXd* powers_out = nullptr) {
  Eigen::VectorXd powers = Eigen::VectorXd::Zero(s.uav_count);
  for (int i = 0; i < s.uav_count; ++i) {
    const int served = u.row(i).sum();
    const bool aligned = policy == PhasePolicy::AlignSingleUser && served == 1;
    for (int j = 0; j < s.user_count(); ++j) {
      if (u(i, j) == 0 || t.floors(j) == 0.0) continue;
      const double g = priced_gain(t, s, m, i, j, aligned);
      if (g <= 0.0) {
        if (powers_out) *powers_out = powers;
        return kInf;
      }
      powers(i) = std::max(powers(i), t.floors(j) / g);
    }
  }
  if (powers_out) *powers_out = powers;
  return powers.sum();
}

// Materializes the phase matrix matching priced_total's AlignSingleUser view.
Eigen::MatrixXd materialize_theta(const Scenario& s, const Eigen::Matrix2Xd& q,
                                  const Eigen::MatrixXd& base_theta,
                                  const Eigen::MatrixXi& u, const Eigen::MatrixXi& m) {
  Eigen::MatrixXd theta = base_theta;
  for (int i = 0; i < s.uav_count; ++i) {
    if (u.row(i).sum() != 1) continue;
    int user = 0;
    while (u(i, user) == 0) ++user;
    std::vector<int> ris;
    for (int l = 0; l < s.ris_count(); ++l) {
      if (m(i, l)) ris.push_back(l);
    }
    if (ris.empty()) continue;
    const Eigen::MatrixXd rows = align_phases(s, q.col(i), user, ris);
    for (std::size_t r = 0; r < ris.size(); ++r) theta.row(ris[r]) = rows.row(r);
  }
  return theta;
}

}  // namespace

AssociationEval evaluate_association(const Scenario& s, const Eigen::Matrix2Xd& q,
                                     const Eigen::MatrixXd& base_theta,
                                     const Eigen::MatrixXi& user_assoc,
                                     const Eigen::MatrixXi& ris_assoc, PhasePolicy policy,
                                     const PhaseOptions& opt, std::uint64_t seed) {
  AssociationEval out;
  if (policy == PhasePolicy::FullReoptimize) {
    Eigen::MatrixXd theta = base_theta;
    for (int i = 0; i < s.uav_count; ++i) {
      std::vector<int> users, ris;
      for (int j = 0; j < s.user_count(); ++j)
        if (user_assoc(i, j)) users.push_back(j);
      for (int l = 0; l < s.ris_count(); ++l)
        if (ris_assoc(i, l)) ris.push_back(l);
      if (users.empty() || ris.empty()) continue;
      Eigen::MatrixXd cur(ris.size(), s.ris_elements);
      for (std::size_t r = 0; r < ris.size(); ++r) cur.row(r) = theta.row(ris[r]);
      const Eigen::MatrixXd rows =
          optimize_uav_phases(s, q.col(i), users, ris, cur, opt, seed ^ (0x9e37u + i));
      for (std::size_t r = 0; r < ris.size(); ++r) theta.row(ris[r]) = rows.row(r);
    }
    out.theta = theta;
    const Tables t = build_tables(s, q, theta);
    out.total = priced_total(t, s, user_assoc, ris_assoc, PhasePolicy::Keep, &out.powers);
    return out;
  }
  const Tables t = build_tables(s, q, base_theta);
  out.total = priced_total(t, s, user_assoc, ris_assoc, policy, &out.powers);
  out.theta = policy == PhasePolicy::AlignSingleUser
                  ? materialize_theta(s, q, base_theta, user_assoc, ris_assoc)
                  : base_theta;
  return out;
}

Eigen::MatrixXi user_assoc_step(const UserDualState& dual, const Eigen::MatrixXd& gains,
                                const Eigen::VectorXd& floors) {
  const int d = static_cast<int>(gains.rows()), u = static_cast<int>(gains.cols());
  Eigen::MatrixXi assoc = Eigen::MatrixXi::Zero(d, u);
  for (int j = 0; j < u; ++j) {
    int best = -1;
    double best_coef = kInf;
    for (int i = 0; i < d; ++i) {
      if (gains(i, j) <= 0.0 && floors(j) > 0.0) continue;
      const double coef =
          floors(j) > 0.0 ? dual.beta(i, j) * floors(j) / gains(i, j) : 0.0;
      if (coef < best_coef) {
        best_coef = coef;
        best = i;
      }
    }
    if (best < 0) {
      throw NoCoverage("user_assoc_step: user " + std::to_string(j) +
                       " has zero gain to every UAV");
    }
    assoc(best, j) = 1;
  }
  return assoc;
}

void user_beta_update(UserDualState& dual, const Eigen::MatrixXi& user_assoc,
                      const Eigen::VectorXd& powers, const Eigen::MatrixXd& gains,
                      const Eigen::VectorXd& floors, double power_scale) {
  dual.iteration += 1;
  const double rho = dual.rho0 / std::sqrt(static_cast<double>(dual.iteration));
  const double inv_scale = 1.0 / std::max(power_scale, 1e-300);
  for (int i = 0; i < gains.rows(); ++i) {
    // The inner power minimizer is bang-bang: zero while the row of
    // multipliers is slack, the realized requirement once it saturates.
    // Served multipliers therefore climb until the row prices power fully,
    // after which the non-binding ones decay and users migrate.
    const double inner_power =
        dual.beta.row(i).sum() >= 1.0 - 1e-12 ? powers(i) : 0.0;
    for (int j = 0; j < gains.cols(); ++j) {
      double demand = 0.0;
      if (user_assoc(i, j) != 0 && floors(j) > 0.0) {
        demand = gains(i, j) > 0.0 ? floors(j) / gains(i, j) : kInf;
      }
      const double step = rho * (demand - inner_power) * inv_scale;
      dual.beta(i, j) = std::max(0.0, dual.beta(i, j) + step);
    }
    const double row = dual.beta.row(i).sum();
    if (row > 1.0) dual.beta.row(i) /= row;
  }
}

UserAssocResult optimize_user_association(const Scenario& s, const Eigen::Matrix2Xd& q,
                                          const PhaseMatrix& phases,
                                          const Eigen::MatrixXi& ris_assoc,
                                          const DualOptions& opt) {
  const int d = s.uav_count, u = s.user_count();
  const Tables t = build_tables(s, q, phases.theta);

  // Gains are fixed for the whole search: the surface assignment row of each
  // UAV is frozen here.
  Eigen::MatrixXd gains(d, u);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < u; ++j) {
      std::complex<double> g(t.h_los(i, j), 0.0);
      for (int l = 0; l < s.ris_count(); ++l) {
        if (ris_assoc(i, l)) g += t.r_keep[i](l, j);
      }
      gains(i, j) = std::abs(g);
    }
  }

  UserDualState dual;
  dual.beta = Eigen::MatrixXd::Constant(d, u, 1.0 / (2.0 * u));
  dual.rho0 = opt.rho0;

  UserAssocResult best;
  best.total = kInf;
  Eigen::VectorXd powers(d);
  for (int iter = 0; iter < opt.iterations; ++iter) {
    const Eigen::MatrixXi cand = user_assoc_step(dual, gains, t.floors);
    powers.setZero();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < u; ++j) {
        if (cand(i, j) && t.floors(j) > 0.0) {
          powers(i) = std::max(powers(i), t.floors(j) / gains(i, j));
        }
      }
    }
    const double total = powers.sum();
    if (total < best.total) {
      best.user_assoc = cand;
      best.powers = powers;
      best.total = total;
      best.iterations = iter + 1;
    }
    user_beta_update(dual, cand, powers, gains, t.floors,
                     std::max(best.total / d, 1e-300));
  }
  return best;
}

RisCoefficients ris_coefficients(const Scenario& s, const Eigen::Vector2d& q,
                                 const PhaseMatrix& phases, int user) {
  const int L = s.ris_count();
  RisCoefficients c;
  const double h = los_gain(s.uav_position(q), s.user_position(user), s.vlc);
  c.c0 = h * h;
  c.c_l = Eigen::VectorXd::Zero(L);
  c.c_lv = Eigen::MatrixXd::Zero(L, L);
  std::vector<std::complex<double>> r(L);
  for (int l = 0; l < L; ++l) {
    r[l] = reflected_term(s, q, phases.theta.row(l), l, user);
    c.c_l(l) = 2.0 * h * std::real(r[l]) + std::norm(r[l]);
  }
  for (int l = 1; l < L; ++l) {
    for (int v = 0; v < l; ++v) {
      c.c_lv(l, v) = 2.0 * std::real(std::conj(r[l]) * r[v]);
    }
  }
  return c;
}

RisAssocResult ris_dual_solve(const Scenario& s, const Eigen::Matrix2Xd& q,
                              const PhaseMatrix& phases, const Eigen::MatrixXi& user_assoc,
                              const Eigen::MatrixXi& current, const DualOptions& opt) {
  const int d = s.uav_count, L = s.ris_count();
  const Tables t = build_tables(s, q, phases.theta);

  RisAssocResult best;
  best.ris_assoc = current;
  best.total = priced_total(t, s, user_assoc, current, PhasePolicy::AlignSingleUser,
                            &best.powers);
  if (L == 0) {
    best.theta = phases.theta;
    return best;
  }

  // Expansion coefficients of every served pair, in normalized gain units.
  // Each UAV's coefficients are built at the phases the candidate pricing
  // will actually apply: aligned rows for a single served user, the given
  // matrix otherwise. The expansion then ranks candidates exactly as the
  // best-candidate tracking prices them.
  struct Served {
    int i, j;
    RisCoefficients c;
    double floor;
  };
  std::vector<Served> served;
  double h0sq = 0.0;
  for (int i = 0; i < d; ++i) {
    std::vector<int> users_i;
    for (int j = 0; j < s.user_count(); ++j) {
      if (user_assoc(i, j)) users_i.push_back(j);
    }
    PhaseMatrix effective;
    effective.theta = phases.theta;
    if (users_i.size() == 1) {
      std::vector<int> all(L);
      for (int l = 0; l < L; ++l) all[l] = l;
      effective.theta = align_phases(s, q.col(i), users_i.front(), all);
    }
    for (int j : users_i) {
      if (t.floors(j) == 0.0) continue;
      Served sv;
      sv.i = i;
      sv.j = j;
      sv.c = ris_coefficients(s, q.col(i), effective, j);
      sv.floor = t.floors(j);
      double reach = sv.c.c0 + sv.c.c_l.cwiseAbs().sum() + sv.c.c_lv.cwiseAbs().sum();
      h0sq = std::max(h0sq, reach);
      served.push_back(std::move(sv));
    }
  }
  if (served.empty()) {
    best.theta = phases.theta;
    return best;
  }
  const double h0 = std::sqrt(std::max(h0sq, 1e-300));
  const double p0 = std::isfinite(best.total) && best.total > 0.0
                        ? best.total / d
                        : 1.0;  // power scale for the multiplier dynamics

  // Multipliers: tau/gamma per served pair, three Gammas per UAV and ordered
  // surface pair (l > v). Initialized to each user's share of its UAV's power
  // demand, so the assignment rule starts out weighting the binding users.
  std::vector<Eigen::MatrixXd> g1(d, Eigen::MatrixXd::Zero(L, L)), g2 = g1, g3 = g1;
  std::vector<double> htil(served.size());
  std::vector<double> tau(served.size()), gamma(served.size());
  {
    Eigen::VectorXd demand(served.size());
    Eigen::VectorXd worst = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < served.size(); ++k) {
      const auto& sv = served[k];
      const bool aligned = user_assoc.row(sv.i).sum() == 1;
      htil[k] =
          std::max(priced_gain(t, s, current, sv.i, sv.j, aligned) / h0, 1e-9);
      demand(k) = sv.floor / (h0 * htil[k]);
      worst(sv.i) = std::max(worst(sv.i), demand(k));
    }
    for (std::size_t k = 0; k < served.size(); ++k) {
      const double share = worst(served[k].i) > 0.0 ? demand(k) / worst(served[k].i) : 1.0;
      tau[k] = gamma[k] = std::max(share, 1e-3);
    }
  }

  Eigen::MatrixXi m = current;
  Eigen::MatrixXi e = Eigen::MatrixXi::Zero(d, L * L);  // E_ilv, flattened l*L+v
  for (int iter = 1; iter <= opt.iterations; ++iter) {
    const double rho = opt.rho0 / std::sqrt(static_cast<double>(iter));

    // Pairwise products: activated when their aggregated multiplier is positive.
    for (int i = 0; i < d; ++i) {
      for (int l = 1; l < L; ++l) {
        for (int v = 0; v < l; ++v) {
          double coef = g1[i](l, v) - g2[i](l, v) - g3[i](l, v);
          for (std::size_t k = 0; k < served.size(); ++k) {
            if (served[k].i == i) coef += gamma[k] * served[k].c.c_lv(l, v) / h0sq;
          }
          e(i, l * L + v) = coef > 0.0 ? 1 : 0;
        }
      }
    }

    // Assignment rule: surface l goes to the UAV with the smallest aggregated
    // coefficient; the boundary cases l = first / last drop the empty sums.
    m.setZero();
    for (int l = 0; l < L; ++l) {
      int best_i = 0;
      double best_c = kInf;
      for (int i = 0; i < d; ++i) {
        double c = 0.0;
        for (std::size_t k = 0; k < served.size(); ++k) {
          if (served[k].i == i) c -= gamma[k] * served[k].c.c_l(l) / h0sq;
        }
        for (int v = 0; v < l; ++v) c -= g2[i](l, v) - g1[i](l, v);
        for (int v = l + 1; v < L; ++v) c -= g3[i](v, l) - g1[i](v, l);
        if (c < best_c) {
          best_c = c;
          best_i = i;
        }
      }
      m(best_i, l) = 1;
    }

    // Stationarity of the auxiliary gain, then the minimal covering powers.
    for (std::size_t k = 0; k < served.size(); ++k) {
      if (gamma[k] > 0.0) {
        const double cube = tau[k] * (served[k].floor / (h0 * p0)) / gamma[k];
        htil[k] = std::clamp(std::cbrt(cube), 1e-9, 1e3);
      }
    }
    Eigen::VectorXd pw = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < served.size(); ++k) {
      pw(served[k].i) =
          std::max(pw(served[k].i), served[k].floor / (h0 * p0) / htil[k]);
    }

    // Subgradient steps on all multipliers.
    for (std::size_t k = 0; k < served.size(); ++k) {
      const auto& sv = served[k];
      tau[k] = std::max(0.0, tau[k] - rho * (pw(sv.i) - sv.floor / (h0 * p0) / htil[k]));
      double quad = sv.c.c0 / h0sq;
      for (int l = 0; l < L; ++l) quad += sv.c.c_l(l) / h0sq * m(sv.i, l);
      for (int l = 1; l < L; ++l) {
        for (int v = 0; v < l; ++v) {
          quad += sv.c.c_lv(l, v) / h0sq * e(sv.i, l * L + v);
        }
      }
      gamma[k] = std::max(0.0, gamma[k] - rho * (quad - htil[k] * htil[k]));
    }
    for (int i = 0; i < d; ++i) {
      for (int l = 1; l < L; ++l) {
        for (int v = 0; v < l; ++v) {
          const int ee = e(i, l * L + v);
          g1[i](l, v) = std::max(0.0, g1[i](l, v) - rho * (ee - m(i, l) - m(i, v) + 1));
          g2[i](l, v) = std::max(0.0, g2[i](l, v) - rho * (m(i, l) - ee));
          g3[i](l, v) = std::max(0.0, g3[i](l, v) - rho * (m(i, v) - ee));
        }
      }
    }

    Eigen::VectorXd powers;
    const double total =
        priced_total(t, s, user_assoc, m, PhasePolicy::AlignSingleUser, &powers);
    if (total < best.total) {
      best.ris_assoc = m;
      best.powers = powers;
      best.total = total;
    }
  }

  best.theta = materialize_theta(s, q, phases.theta, user_assoc, best.ris_assoc);
  return best;
}

RisAssocResult ris_greedy(const Scenario& s, const Eigen::Matrix2Xd& q,
                          const PhaseMatrix& phases, const Eigen::MatrixXi& user_assoc,
                          const Eigen::MatrixXi& current, PhasePolicy policy,
                          const PhaseOptions& opt, std::uint64_t seed) {
  const int d = s.uav_count, L = s.ris_count();
  const Tables t = build_tables(s, q, phases.theta);

  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(d, L);
  for (int l = 0; l < L; ++l) {
    int best_i = 0;
    double best_total = kInf;
    for (int i = 0; i < d; ++i) {
      m(i, l) = 1;
      double total;
      if (policy == PhasePolicy::FullReoptimize) {
        total = evaluate_association(s, q, phases.theta, user_assoc, m, policy, opt,
                                     seed ^ (l * 131u + i))
                    .total;
      } else {
        total = priced_total(t, s, user_assoc, m, policy);
      }
      m(i, l) = 0;
      if (total < best_total) {
        best_total = total;
        best_i = i;
      }
    }
    m(best_i, l) = 1;
  }

  RisAssocResult out;
  const AssociationEval won =
      evaluate_association(s, q, phases.theta, user_assoc, m, policy, opt, seed);
  const AssociationEval incumbent =
      evaluate_association(s, q, phases.theta, user_assoc, current, policy, opt, seed);
  if (won.total <= incumbent.total) {
    out.ris_assoc = m;
    out.powers = won.powers;
    out.theta = won.theta;
    out.total = won.total;
  } else {
    out.ris_assoc = current;
    out.powers = incumbent.powers;
    out.theta = incumbent.theta;
    out.total = incumbent.total;
  }
  return out;
}

}  // namespace uavlc
