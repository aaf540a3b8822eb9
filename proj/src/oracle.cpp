#include "uavlc/oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "uavlc/channel.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc::oracle {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

GridPhaseResult grid_phase_search(const Scenario& s, const Eigen::Vector2d& q,
                                  const std::vector<int>& users,
                                  const std::vector<int>& ris_set,
                                  double resolution_deg) {
  const int m = s.ris_elements;
  const int dims = static_cast<int>(ris_set.size()) * m;
  const int steps = std::max(1, static_cast<int>(std::lround(360.0 / resolution_deg)));
  double points = 1.0;
  for (int k = 0; k < dims; ++k) points *= steps;
  if (points > 1e8) {
    throw TooLarge("grid_phase_search: " + std::to_string(points) + " grid points");
  }

  // Per (user, surface, element) products conj(h_rg) * h_ur so a candidate
  // evaluation is a pure phase sum.
  std::vector<double> floors;
  std::vector<double> direct;
  std::vector<std::vector<Eigen::VectorXcd>> prods;  // [user][ris]
  for (int j : users) {
    floors.push_back(power_floor(s, j));
    direct.push_back(los_gain(s.uav_position(q), s.user_position(j), s.vlc));
    std::vector<Eigen::VectorXcd> per;
    for (int l : ris_set) {
      const ChannelVector ur = ur_channel(s, q, l);
      const ChannelVector rg = rg_channel(s, l, j);
      per.push_back(rg.entries.conjugate().cwiseProduct(ur.entries));
    }
    prods.push_back(std::move(per));
  }

  std::vector<int> odo(dims, 0);
  Eigen::VectorXd theta(dims);
  GridPhaseResult best;
  best.objective = kInf;
  const double delta = kTwoPi / steps;
  while (true) {
    for (int k = 0; k < dims; ++k) theta(k) = odo[k] * delta;
    double worst = -kInf;
    for (std::size_t ju = 0; ju < users.size(); ++ju) {
      std::complex<double> total(direct[ju], 0.0);
      for (std::size_t r = 0; r < ris_set.size(); ++r) {
        for (int e = 0; e < m; ++e) {
          total += std::polar(1.0, theta(r * m + e)) * prods[ju][r](e);
        }
      }
      const double w = floors[ju] > 0.0 ? 1.0 / (floors[ju] * floors[ju]) : 1.0;
      worst = std::max(worst, -w * std::norm(total));
    }
    if (worst < best.objective) {
      best.objective = worst;
      best.theta = Eigen::Map<Eigen::MatrixXd>(theta.data(), m, ris_set.size()).transpose();
    }
    int k = 0;
    while (k < dims && ++odo[k] == steps) odo[k++] = 0;
    if (k == dims) break;
  }
  return best;
}

AssociationSearchResult exhaustive_association(const Scenario& s,
                                               const Eigen::Matrix2Xd& deployment,
                                               const PhaseMatrix& phases) {
  const int d = s.uav_count, u = s.user_count(), L = s.ris_count();
  const double combos = std::pow(d, u) * std::pow(d, L);
  if (combos > 1e6) {
    throw TooLarge("exhaustive_association: " + std::to_string(combos) + " candidates");
  }

  // Channel tables; the re-alignment below uses only these path losses.
  Eigen::MatrixXd h_los(d, u), h_ur(d, L), h_rg(L, u);
  std::vector<Eigen::MatrixXcd> r_keep(d, Eigen::MatrixXcd::Zero(L, u));
  Eigen::VectorXd floors(u);
  for (int j = 0; j < u; ++j) floors(j) = power_floor(s, j);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < u; ++j)
      h_los(i, j) = los_gain(s.uav_position(deployment.col(i)), s.user_position(j), s.vlc);
    for (int l = 0; l < L; ++l) {
      h_ur(i, l) = los_gain(s.uav_position(deployment.col(i)), s.ris_position(l), s.vlc);
      for (int j = 0; j < u; ++j)
        r_keep[i](l, j) = reflected_term(s, deployment.col(i), phases.theta.row(l), l, j);
    }
  }
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < u; ++j)
      h_rg(l, j) = los_gain(s.ris_position(l), s.user_position(j), s.vlc);

  std::vector<int> owner_u(u, 0), owner_m(L, 0);
  AssociationSearchResult best;
  best.total = kInf;
  Eigen::MatrixXi mu(d, u), mm(d, L);
  while (true) {
    mu.setZero();
    mm.setZero();
    for (int j = 0; j < u; ++j) mu(owner_u[j], j) = 1;
    for (int l = 0; l < L; ++l) mm(owner_m[l], l) = 1;

    double total = 0.0;
    for (int i = 0; i < d && total < kInf; ++i) {
      int served = 0;
      for (int j = 0; j < u; ++j) served += mu(i, j);
      double p = 0.0;
      for (int j = 0; j < u; ++j) {
        if (!mu(i, j) || floors(j) == 0.0) continue;
        double g;
        if (served == 1) {  // coherent alignment adds every path in phase
          g = h_los(i, j);
          for (int l = 0; l < L; ++l)
            if (mm(i, l)) g += s.ris_elements * h_ur(i, l) * h_rg(l, j);
        } else {
          std::complex<double> c(h_los(i, j), 0.0);
          for (int l = 0; l < L; ++l)
            if (mm(i, l)) c += r_keep[i](l, j);
          g = std::abs(c);
        }
        if (g <= 0.0) {
          p = kInf;
          break;
        }
        p = std::max(p, floors(j) / g);
      }
      total += p;
    }
    if (total < best.total) {
      best.total = total;
      best.user_assoc = mu;
      best.ris_assoc = mm;
    }

    int k = 0;
    while (k < u && ++owner_u[k] == d) owner_u[k++] = 0;
    if (k == u) {
      int t = 0;
      while (t < L && ++owner_m[t] == d) owner_m[t++] = 0;
      if (t == L) break;
    }
  }
  return best;
}

GridDeploymentResult grid_deployment(const Scenario& s, const Association& assoc,
                                     const PhaseMatrix& phases, double step) {
  const int d = s.uav_count;
  if (d > 2) throw TooLarge("grid_deployment: more than two UAVs");
  const int nx = static_cast<int>(std::floor(s.area.x() / step)) + 1;
  const int ny = static_cast<int>(std::floor(s.area.y() / step)) + 1;
  if (static_cast<double>(nx) * ny > 1e4) {
    throw TooLarge("grid_deployment: lattice exceeds 1e4 points per UAV");
  }

  auto power_at = [&](const Eigen::Matrix2Xd& q) {
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
      total += required_power_or_inf(s, q, phases, assoc, i);
    }
    return total;
  };

  GridDeploymentResult best;
  best.total = kInf;
  Eigen::Matrix2Xd q(2, d);
  if (d == 1) {
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) {
        q.col(0) = Eigen::Vector2d(ix * step, iy * step);
        const double p = power_at(q);
        if (p < best.total) {
          best.total = p;
          best.deployment = q;
        }
      }
    }
    return best;
  }
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      q.col(0) = Eigen::Vector2d(ix * step, iy * step);
      for (int jx = 0; jx < nx; ++jx) {
        for (int jy = 0; jy < ny; ++jy) {
          q.col(1) = Eigen::Vector2d(jx * step, jy * step);
          if ((q.col(0) - q.col(1)).norm() < s.min_separation) continue;
          const double p = power_at(q);
          if (p < best.total) {
            best.total = p;
            best.deployment = q;
          }
        }
      }
    }
  }
  return best;
}

}  // namespace uavlc::oracle
