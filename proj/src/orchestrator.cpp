#include "uavlc/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "uavlc/channel.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"

namespace uavlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_draw(std::uint64_t& state) {
  state = splitmix64(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

// Pushes UAVs pairwise apart until the separation constraint holds; falls
// back to a regular grid when the area is too crowded to repair in place.
void enforce_separation(const Scenario& s, Eigen::Matrix2Xd& q, std::uint64_t& rng) {
  const int d = s.uav_count;
  if (d < 2 || s.min_separation == 0.0) return;
  for (int round = 0; round < 200; ++round) {
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      for (int k = i + 1; k < d; ++k) {
        Eigen::Vector2d delta = q.col(i) - q.col(k);
        double dist = delta.norm();
        if (dist >= s.min_separation) continue;
        ok = false;
        if (dist < 1e-9) {
          const double ang = unit_draw(rng) * 2.0 * M_PI;
          delta = Eigen::Vector2d(std::cos(ang), std::sin(ang));
          dist = 1.0;
        }
        const Eigen::Vector2d push = delta / dist * (s.min_separation - dist) * 0.5001;
        q.col(i) += push;
        q.col(k) -= push;
      }
    }
    if (ok) return;
  }
  // Grid fallback, deterministic and always separated.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  for (int i = 0; i < d; ++i) {
    q(0, i) = (i % cols) * s.min_separation;
    q(1, i) = (i / cols) * s.min_separation;
  }
}

double total_power(const Scenario& s, const Solution& sol) {
  return total_power_or_inf(s, sol);
}

Eigen::VectorXd powers_of(const Scenario& s, const Solution& sol) {
  Eigen::VectorXd p(s.uav_count);
  for (int i = 0; i < s.uav_count; ++i) {
    p(i) = required_power_or_inf(s, sol.deployment, sol.phases, sol.assoc, i);
  }
  return p;
}

Scenario strip_ris(const Scenario& s) {
  Scenario out = s;
  out.ris_list.resize(2, 0);
  return out;
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Scheme1Dual: return "scheme1-dual";
    case Scheme::Scheme2Greedy: return "scheme2-greedy";
    case Scheme::NoRis: return "no-ris";
    case Scheme::InitialOnly: return "initial-only";
    case Scheme::PhaseOnly: return "phase-only";
    case Scheme::DeploymentOnly: return "deployment-only";
    case Scheme::UserAssocOnly: return "user-assoc-only";
    case Scheme::RisAssocOnly: return "ris-assoc-only";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "scheme1-dual" || name == "scheme1") return Scheme::Scheme1Dual;
  if (name == "scheme2-greedy" || name == "scheme2") return Scheme::Scheme2Greedy;
  if (name == "no-ris") return Scheme::NoRis;
  if (name == "initial-only") return Scheme::InitialOnly;
  if (name == "phase-only") return Scheme::PhaseOnly;
  if (name == "deployment-only") return Scheme::DeploymentOnly;
  if (name == "user-assoc-only") return Scheme::UserAssocOnly;
  if (name == "ris-assoc-only") return Scheme::RisAssocOnly;
  throw DomainError("unknown scheme: " + name);
}

Solution initialize(const Scenario& s, std::uint64_t seed) {
  const int d = s.uav_count, u = s.user_count(), L = s.ris_count();
  std::uint64_t rng = splitmix64(seed ^ 0xa11ce5ULL);

  // A user no UAV can ever reach makes every start infeasible.
  Solution sol;
  sol.phases = PhaseMatrix::zeros(L, s.ris_elements);

  for (int attempt = 0; attempt < 10; ++attempt) {
    sol.assoc.user_assoc = Eigen::MatrixXi::Zero(d, u);
    sol.assoc.ris_assoc = Eigen::MatrixXi::Zero(d, L);
    for (int j = 0; j < u; ++j) {
      sol.assoc.user_assoc(static_cast<int>(unit_draw(rng) * d) % d, j) = 1;
    }
    for (int l = 0; l < L; ++l) {
      sol.assoc.ris_assoc(static_cast<int>(unit_draw(rng) * d) % d, l) = 1;
    }

    sol.deployment.resize(2, d);
    for (int i = 0; i < d; ++i) {
      Eigen::Vector2d c = Eigen::Vector2d::Zero();
      int count = 0;
      for (int j = 0; j < u; ++j) {
        if (sol.assoc.user_assoc(i, j)) {
          c += s.users.col(j);
          ++count;
        }
      }
      if (count > 0) {
        sol.deployment.col(i) = c / count;
      } else {
        sol.deployment.col(i) =
            Eigen::Vector2d(0.5 * s.area.x() + (unit_draw(rng) - 0.5),
                            0.5 * s.area.y() + (unit_draw(rng) - 0.5));
      }
    }
    enforce_separation(s, sol.deployment, rng);

    sol.powers = powers_of(s, sol);
    if (sol.powers.allFinite()) return sol;
  }
  throw NoCoverage("initialize: some user has zero gain after 10 association redraws");
}

namespace {

void phases_block(const Scenario& s, Solution& sol, const RunConfig& cfg, int pass) {
  // Per-UAV acceptance: phase rows of different UAVs are independent, so each
  // UAV keeps its incumbent rows unless the new ones lower its own power.
  for (int i = 0; i < s.uav_count; ++i) {
    std::vector<int> users, ris;
    for (int j = 0; j < s.user_count(); ++j)
      if (sol.assoc.user_assoc(i, j)) users.push_back(j);
    for (int l = 0; l < s.ris_count(); ++l)
      if (sol.assoc.ris_assoc(i, l)) ris.push_back(l);
    if (users.empty() || ris.empty()) continue;

    Eigen::MatrixXd cur(ris.size(), s.ris_elements);
    for (std::size_t r = 0; r < ris.size(); ++r)
      cur.row(r) = sol.phases.theta.row(ris[r]);

    const Eigen::MatrixXd rows = optimize_uav_phases(
        s, sol.deployment.col(i), users, ris, cur, cfg.phase,
        splitmix64(cfg.seed ^ (0x9e3779b9ULL * pass + i)));

    const double before =
        required_power_or_inf(s, sol.deployment, sol.phases, sol.assoc, i);
    PhaseMatrix cand = sol.phases;
    for (std::size_t r = 0; r < ris.size(); ++r) cand.theta.row(ris[r]) = rows.row(r);
    const double after = required_power_or_inf(s, sol.deployment, cand, sol.assoc, i);
    if (after <= before) sol.phases = std::move(cand);
  }
  sol.powers = powers_of(s, sol);
}

}  // namespace

RunTrace run(const Scenario& scenario, const RunConfig& config) {
  const Scenario s =
      config.scheme == Scheme::NoRis ? strip_ris(scenario) : scenario;

  RunTrace trace;
  Solution sol = initialize(s, config.seed);
  double current = total_power(s, sol);
  trace.objectives.push_back(current);
  trace.final = sol;
  if (config.scheme == Scheme::InitialOnly) {
    trace.outer_iters = 0;
    trace.converged = true;
    return trace;
  }

  const bool do_phases = config.scheme != Scheme::DeploymentOnly &&
                         config.scheme != Scheme::UserAssocOnly &&
                         config.scheme != Scheme::RisAssocOnly;
  const bool do_deploy = config.scheme == Scheme::Scheme1Dual ||
                         config.scheme == Scheme::Scheme2Greedy ||
                         config.scheme == Scheme::NoRis ||
                         config.scheme == Scheme::DeploymentOnly;
  const bool do_users = config.scheme == Scheme::Scheme1Dual ||
                        config.scheme == Scheme::Scheme2Greedy ||
                        config.scheme == Scheme::NoRis ||
                        config.scheme == Scheme::UserAssocOnly;
  const bool do_ris = config.scheme == Scheme::Scheme1Dual ||
                      config.scheme == Scheme::Scheme2Greedy ||
                      config.scheme == Scheme::RisAssocOnly;

  for (int pass = 1; pass <= config.max_outer; ++pass) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, double>> blocks;

    auto guard = [&](const char* name, Solution&& cand) {
      const double val = total_power(s, cand);
      if (val <= current * (1.0 + 1e-12)) {
        sol = std::move(cand);
        sol.powers = powers_of(s, sol);
        current = val;
      }
      blocks.emplace_back(name, current);
    };

    if (do_phases && s.ris_count() > 0) {
      Solution cand = sol;
      phases_block(s, cand, config, pass);
      guard("phases", std::move(cand));
    }

    if (do_deploy) {
      const DeploymentResult dep = optimize_deployment(s, sol.deployment, sol.assoc,
                                                       sol.phases, config.sca);
      if (!dep.failure.empty()) trace.failures.push_back("deployment: " + dep.failure);
      Solution cand = sol;
      cand.deployment = dep.deployment;
      guard("deployment", std::move(cand));
    }

    if (do_users) {
      try {
        const UserAssocResult ua = optimize_user_association(
            s, sol.deployment, sol.phases, sol.assoc.ris_assoc, config.user_assoc);
        Solution cand = sol;
        cand.assoc.user_assoc = ua.user_assoc;
        guard("user-assoc", std::move(cand));
      } catch (const NoCoverage& e) {
        trace.failures.push_back(std::string("user-assoc: ") + e.what());
        blocks.emplace_back("user-assoc", current);
      }
    }

    if (do_ris && s.ris_count() > 0) {
      RisAssocResult ra;
      if (config.scheme == Scheme::Scheme2Greedy) {
        ra = ris_greedy(s, sol.deployment, sol.phases, sol.assoc.user_assoc,
                        sol.assoc.ris_assoc, PhasePolicy::AlignSingleUser, config.phase,
                        splitmix64(config.seed ^ (0x51edULL * pass)));
      } else {
        ra = ris_dual_solve(s, sol.deployment, sol.phases, sol.assoc.user_assoc,
                            sol.assoc.ris_assoc, config.ris_assoc);
      }
      Solution cand = sol;
      cand.assoc.ris_assoc = ra.ris_assoc;
      cand.phases.theta = ra.theta;
      guard("ris-assoc", std::move(cand));
    }

    const auto t1 = std::chrono::steady_clock::now();
    trace.block_objectives.push_back(std::move(blocks));
    trace.wall_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    trace.objectives.push_back(current);
    trace.outer_iters = pass;

    const double prev = trace.objectives[trace.objectives.size() - 2];
    const double change = prev - current;
    if (change <= config.outer_tol * std::max(prev, 1e-300)) {
      trace.converged = true;
      break;
    }
  }

  sol.powers = powers_of(s, sol);
  trace.final = sol;
  return trace;
}

}  // namespace uavlc
