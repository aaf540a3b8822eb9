#include "uavlc/model.hpp"

#include <cmath>
#include <limits>

#include "uavlc/channel.hpp"
#include "uavlc/errors.hpp"

namespace uavlc {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double power_floor(const Scenario& s, int user) {
  const double xi = s.vlc.responsivity;
  const double illum = s.illumination_demands(user) / xi;
  const double rt = s.rate_requirement;
  // Inverse of the achievable-rate expression at equality.
  const double rate =
      s.vlc.noise_power * std::sqrt(2.0 * kPi / kE * (std::exp2(2.0 * rt) - 1.0)) / xi;
  return std::max(illum, rate);
}

double required_power(const Scenario& s, const Eigen::Matrix2Xd& deployment,
                      const PhaseMatrix& phases, const Association& assoc, int uav) {
  double p = 0.0;
  for (int j = 0; j < s.user_count(); ++j) {
    if (assoc.user_assoc(uav, j) == 0) continue;
    const double floor = power_floor(s, j);
    if (floor == 0.0) continue;
    const double h =
        aggregate_gain(s, deployment.col(uav), phases, assoc.ris_assoc.row(uav), j);
    if (h <= 0.0) {
      throw InfeasibleChannel("required_power: served user " + std::to_string(j) +
                              " has zero gain from UAV " + std::to_string(uav));
    }
    p = std::max(p, floor / h);
  }
  return p;
}

double required_power_or_inf(const Scenario& s, const Eigen::Matrix2Xd& deployment,
                             const PhaseMatrix& phases, const Association& assoc,
                             int uav) noexcept {
  try {
    return required_power(s, deployment, phases, assoc, uav);
  } catch (const InfeasibleChannel&) {
    return kInf;
  }
}

double total_power_or_inf(const Scenario& s, const Solution& sol) noexcept {
  double total = 0.0;
  for (int i = 0; i < s.uav_count; ++i) {
    total += required_power_or_inf(s, sol.deployment, sol.phases, sol.assoc, i);
  }
  return total;
}

FeasibilityReport check_feasibility(const Scenario& s, const Solution& sol) {
  const int d = s.uav_count;
  const int u = s.user_count();
  FeasibilityReport rep;
  rep.rate_slack = Eigen::MatrixXd::Constant(d, u, kInf);
  rep.illumination_slack = Eigen::MatrixXd::Constant(d, u, kInf);
  rep.separation_slack = Eigen::MatrixXd::Constant(d, d, kInf);
  rep.min_slack = kInf;

  const double xi = s.vlc.responsivity;
  const double nw = s.vlc.noise_power;
  for (int i = 0; i < d; ++i) {
    const double p = sol.powers(i);
    bool serves = false;
    for (int j = 0; j < u; ++j) {
      if (sol.assoc.user_assoc(i, j) == 0) continue;
      serves = true;
      const double h =
          aggregate_gain(s, sol.deployment.col(i), sol.phases, sol.assoc.ris_assoc.row(i), j);
      const double snr_amp = xi * p * h / nw;
      rep.rate_slack(i, j) =
          0.5 * std::log2(1.0 + kE / (2.0 * kPi) * snr_amp * snr_amp) - s.rate_requirement;
      rep.illumination_slack(i, j) = xi * p * h - s.illumination_demands(j);
      rep.min_slack = std::min({rep.min_slack, rep.rate_slack(i, j),
                                rep.illumination_slack(i, j)});
    }
    if (!serves && p != 0.0) rep.idle_powers_zero = false;
    if (p < 0.0) rep.powers_nonnegative = false;
    for (int k = i + 1; k < d; ++k) {
      const double sep =
          (sol.deployment.col(i) - sol.deployment.col(k)).norm() - s.min_separation;
      rep.separation_slack(i, k) = sep;
      rep.separation_slack(k, i) = sep;
      rep.min_slack = std::min(rep.min_slack, sep);
    }
  }
  for (int j = 0; j < u; ++j) {
    if (sol.assoc.user_assoc.col(j).sum() != 1) rep.user_columns_ok = false;
  }
  for (int l = 0; l < s.ris_count(); ++l) {
    if (sol.assoc.ris_assoc.col(l).sum() != 1) rep.ris_columns_ok = false;
  }
  if (rep.min_slack == kInf) rep.min_slack = 0.0;  // nothing served, no pairs
  return rep;
}

void validate(const Scenario& s) {
  auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (s.uav_count < 1) fail("uav_count must be >= 1");
  if (s.ris_elements < 1) fail("ris_elements must be >= 1");
  if (!(s.area.x() > 0.0 && s.area.y() > 0.0)) fail("area sides must be positive");
  if (!(s.uav_altitude > 0.0)) fail("uav_altitude must be positive");
  if (s.ris_count() > 0 && !(s.ris_height > 0.0)) fail("ris_height must be positive");
  if (!(s.ris_height < s.uav_altitude))
    fail("ris_height must be below uav_altitude");
  if (s.min_separation < 0.0) fail("min_separation must be >= 0");
  if (s.rate_requirement < 0.0) fail("rate_requirement must be >= 0");
  if (s.illumination_demands.size() != s.user_count())
    fail("illumination_demands must have one entry per user");
  for (int j = 0; j < s.user_count(); ++j) {
    if (s.illumination_demands(j) < 0.0) fail("illumination_demands must be >= 0");
    if (s.users(0, j) < 0.0 || s.users(0, j) > s.area.x() || s.users(1, j) < 0.0 ||
        s.users(1, j) > s.area.y())
      fail("user " + std::to_string(j) + " lies outside the area");
  }
  for (int l = 0; l < s.ris_count(); ++l) {
    if (s.ris_list(0, l) < 0.0 || s.ris_list(0, l) > s.area.x() ||
        s.ris_list(1, l) < 0.0 || s.ris_list(1, l) > s.area.y())
      fail("ris " + std::to_string(l) + " lies outside the area");
  }
  const VlcParams& v = s.vlc;
  if (!(v.semi_angle_half_power > 0.0 && v.semi_angle_half_power < 90.0))
    fail("semi_angle_half_power must lie in (0, 90)");
  if (!(v.fov > 0.0 && v.fov <= 90.0)) fail("fov must lie in (0, 90]");
  if (!(v.pd_area > 0.0)) fail("pd_area must be positive");
  if (!(v.refractive_index > 0.0)) fail("refractive_index must be positive");
  if (!(v.responsivity > 0.0)) fail("responsivity must be positive");
  if (!(v.noise_power > 0.0)) fail("noise_power must be positive");
  if (!(v.carrier_wavelength > 0.0)) fail("carrier_wavelength must be positive");
  if (!(v.element_spacing > 0.0)) fail("element_spacing must be positive");
}

}  // namespace uavlc
