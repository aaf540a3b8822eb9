#include "uavlc/phases.hpp"
#include <cstdio>

#include <cmath>

#include "uavlc/channel.hpp"
#include "uavlc/cones.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double wrap_angle(double a) {
  double t = std::fmod(a, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t == kTwoPi) t = 0.0;
  return t;
}

// Deterministic standard complex normal stream (Box-Muller over splitmix64).
struct GaussianStream {
  std::uint64_t state;
  explicit GaussianStream(std::uint64_t seed) : state(seed) {}
  double uniform() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  std::complex<double> standard_complex() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // variance 1/2 per component
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }
};

}  // namespace

Eigen::MatrixXd align_phases(const Scenario& s, const Eigen::Vector2d& q, int user,
                             const std::vector<int>& ris_set) {
  const int m_count = s.ris_elements;
  Eigen::MatrixXd rows(ris_set.size(), m_count);
  const Eigen::Vector3d uav = s.uav_position(q);
  const Eigen::Vector3d usr = s.user_position(user);
  for (std::size_t r = 0; r < ris_set.size(); ++r) {
    const Eigen::Vector3d ris = s.ris_position(ris_set[r]);
    const double cos_arrival = (ris.x() - uav.x()) / (uav - ris).norm();
    const double cos_departure = (usr.x() - ris.x()) / (ris - usr).norm();
    const double step = kTwoPi * s.vlc.element_spacing / s.vlc.carrier_wavelength *
                        (cos_departure - cos_arrival);
    for (int m = 0; m < m_count; ++m) {
      rows(r, m) = wrap_angle(-step * m);
    }
  }
  return rows;
}

Eigen::VectorXcd build_phi(const Scenario& s, const Eigen::Vector2d& q, int ris,
                           int user) {
  const ChannelVector ur = ur_channel(s, q, ris);
  const ChannelVector rg = rg_channel(s, ris, user);
  return rg.entries.conjugate().cwiseProduct(ur.entries);
}

Eigen::MatrixXcd SdpInstance::q_matrix(int user_index) const {
  const int lcount = static_cast<int>(ris_ids.size());
  const int n = dim();
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  const auto& user_phi = phi[user_index];
  for (int o = 0; o < lcount; ++o) {
    for (int p = 0; p < lcount; ++p) {
      q.block(o * elements, p * elements, elements, elements) =
          user_phi[o] * user_phi[p].adjoint();
    }
    q.block(o * elements, n - 1, elements, 1) = los_terms[user_index] * user_phi[o];
    q.block(n - 1, o * elements, 1, elements) =
        los_terms[user_index] * user_phi[o].adjoint();
  }
  return q;
}

double SdpInstance::minmax_objective(const Eigen::VectorXcd& z_stack) const {
  const int lcount = static_cast<int>(ris_ids.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t ju = 0; ju < user_ids.size(); ++ju) {
    std::complex<double> total(los_terms[ju], 0.0);
    for (int o = 0; o < lcount; ++o) {
      total += z_stack.segment(o * elements, elements).dot(phi[ju][o]);  // conj(z).phi
    }
    worst = std::max(worst, -weights[ju] * std::norm(total));
  }
  return worst;
}

SdpInstance build_sdp(const Scenario& s, const Eigen::Vector2d& q,
                      const std::vector<int>& users, const std::vector<int>& ris_set) {
  if (ris_set.empty()) {
    throw EmptyRisSet("build_sdp: UAV has no associated surface");
  }
  SdpInstance inst;
  inst.ris_ids = ris_set;
  inst.elements = s.ris_elements;
  const Eigen::Vector3d uav = s.uav_position(q);
  for (int j : users) {
    inst.user_ids.push_back(j);
    const double floor = power_floor(s, j);
    inst.weights.push_back(floor > 0.0 ? 1.0 / (floor * floor) : 1.0);
    inst.los_terms.push_back(los_gain(uav, s.user_position(j), s.vlc));
    std::vector<Eigen::VectorXcd> user_phi;
    user_phi.reserve(ris_set.size());
    for (int l : ris_set) user_phi.push_back(build_phi(s, q, l, j));
    inst.phi.push_back(std::move(user_phi));
  }
  return inst;
}

PsdSolution solve_passive_beamforming(const SdpInstance& inst, const SdpOptions& opt) {
  const int n = inst.dim();
  const int users = static_cast<int>(inst.user_ids.size());

  // Per-user energy w_j * (gain data); the epigraph level is nonnegative
  // because the quadratic form is w^H Z w for the stacked channel vector w.
  std::vector<double> energy_at_identity(users);
  double scale = std::numeric_limits<double>::infinity();
  bool dead_user = false;
  for (int ju = 0; ju < users; ++ju) {
    double e = inst.los_terms[ju] * inst.los_terms[ju];
    for (const auto& p : inst.phi[ju]) e += p.squaredNorm();
    energy_at_identity[ju] = inst.weights[ju] * e;
    if (energy_at_identity[ju] <= 0.0) dead_user = true;
    scale = std::min(scale, energy_at_identity[ju]);
  }
  if (users == 0 || dead_user) {
    // A user with no channel at all pins the min-max value to zero and makes
    // every feasible point optimal.
    PsdSolution res;
    res.z_matrix = Eigen::MatrixXcd::Identity(n, n);
    res.objective = 0.0;
    return res;
  }

  // Blocks: [0] embedded lift matrix, [1] epigraph level, [2+j] user slacks.
  cones::BlockSdpForm form;
  form.block_sizes.assign(2 + users, 1);
  form.block_sizes[0] = 2 * n;
  form.cost.emplace_back(1, -Eigen::MatrixXd::Identity(1, 1));
  for (int k = 0; k < n; ++k) {
    cones::BlockSdpForm::Constraint c;
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    diag(k, k) = 0.5;
    diag(k + n, k + n) = 0.5;
    c.terms.emplace_back(0, diag);
    c.rhs = 1.0;
    form.constraints.push_back(std::move(c));
  }
  for (int ju = 0; ju < users; ++ju) {
    cones::BlockSdpForm::Constraint c;
    const double w = inst.weights[ju] / scale;
    Eigen::MatrixXd lift = 0.5 * w * cones::real_embedding(inst.q_matrix(ju));
    // Row scaling keeps strong users from swamping the Schur system when the
    // epigraph level is pinned to the weakest one.
    const double row = std::max(1.0, lift.norm());
    c.terms.emplace_back(0, lift / row);
    c.terms.emplace_back(1, -Eigen::MatrixXd::Identity(1, 1) / row);
    c.terms.emplace_back(2 + ju, -Eigen::MatrixXd::Identity(1, 1) / row);
    c.rhs = -w * inst.los_terms[ju] * inst.los_terms[ju] / row;
    form.constraints.push_back(std::move(c));
  }

  cones::BlockSdpResult r;
  try {
    r = cones::solve_block_sdp(form, opt.tol, opt.max_iters);
  } catch (const SolverFailure& e) {
    fprintf(stderr, "[sdp dump] users=%d dim=%d scale=%.3e\n", users, n, scale);
    for (int ju = 0; ju < users; ++ju) {
      fprintf(stderr, "  user %d w=%.6e los=%.6e e_id=%.6e\n", inst.user_ids[ju],
              inst.weights[ju], inst.los_terms[ju], energy_at_identity[ju]);
      for (const auto& ph : inst.phi[ju]) {
        fprintf(stderr, "    phi norm %.6e\n", ph.norm());
      }
    }
    throw;
  }

  PsdSolution res;
  res.z_matrix = cones::complex_from_embedding(r.primal[0]);
  // Pin the diagonal exactly; the solver satisfies it to tolerance only.
  Eigen::VectorXd d(n);
  for (int k = 0; k < n; ++k) d(k) = 1.0 / std::sqrt(std::real(res.z_matrix(k, k)));
  res.z_matrix = d.asDiagonal() * res.z_matrix * d.asDiagonal();
  res.objective = r.primal_objective * scale;  // = -level in original units
  res.gap = r.gap;
  res.iterations = r.iterations;
  return res;
}

RandomizedPhases randomize_rank_one(const PsdSolution& psd, const SdpInstance& inst,
                                    int trials, std::uint64_t seed) {
  const int n = inst.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psd.z_matrix);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXcd factor = es.eigenvectors() * ev.asDiagonal();

  GaussianStream rng(seed ^ 0x5bf0a8b1u);
  Eigen::VectorXcd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int t = 0; t < std::max(1, trials); ++t) {
    Eigen::VectorXcd g(n);
    for (int k = 0; k < n; ++k) g(k) = rng.standard_complex();
    Eigen::VectorXcd v = factor * g;
    for (int k = 0; k < n; ++k) {
      const double a = std::abs(v(k));
      v(k) = a > 0.0 ? v(k) / a : std::complex<double>(1.0, 0.0);
    }
    // Global rotation fixing the homogenization entry to one.
    const std::complex<double> rot = std::conj(v(n - 1));
    v *= rot;
    v(n - 1) = 1.0;
    const double obj = inst.minmax_objective(v.head(n - 1));
    if (obj < best_obj) {
      best_obj = obj;
      best = v;
    }
  }

  RandomizedPhases out;
  out.objective = best_obj;
  const int lcount = static_cast<int>(inst.ris_ids.size());
  out.theta.resize(lcount, inst.elements);
  for (int o = 0; o < lcount; ++o) {
    for (int m = 0; m < inst.elements; ++m) {
      out.theta(o, m) = wrap_angle(-std::arg(best(o * inst.elements + m)));
    }
  }
  return out;
}

Eigen::MatrixXd optimize_uav_phases(const Scenario& s, const Eigen::Vector2d& q,
                                    const std::vector<int>& users,
                                    const std::vector<int>& ris_set,
                                    const Eigen::MatrixXd& current_rows,
                                    const PhaseOptions& opt, std::uint64_t seed) {
  if (ris_set.empty() || users.empty()) return current_rows;
  if (users.size() == 1) return align_phases(s, q, users.front(), ris_set);
  const SdpInstance inst = build_sdp(s, q, users, ris_set);
  const PsdSolution relax = solve_passive_beamforming(inst, opt.sdp);
  return randomize_rank_one(relax, inst, opt.randomization_trials, seed).theta;
}

}  // namespace uavlc
