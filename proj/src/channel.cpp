#include "uavlc/channel.hpp"

#include <cmath>

#include "uavlc/errors.hpp"

namespace uavlc {

namespace {
constexpr double kPi = 3.14159265358979323846;

double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

double lambertian_order(double semi_angle_deg) {
  if (!(semi_angle_deg > 0.0 && semi_angle_deg < 90.0)) {
    throw DomainError("lambertian_order: semi-angle must lie in (0, 90) degrees, got " +
                      std::to_string(semi_angle_deg));
  }
  return -std::log(2.0) / std::log(std::cos(deg2rad(semi_angle_deg)));
}

double VlcParams::lambertian_order() const {
  return uavlc::lambertian_order(semi_angle_half_power);
}

double VlcParams::concentrator_gain() const {
  const double s = std::sin(deg2rad(fov));
  return refractive_index * refractive_index / (s * s);
}

double concentrator_gain(double incidence_angle_rad, const VlcParams& params) {
  const double fov_rad = deg2rad(params.fov);
  // Closed at the boundary: an incidence angle of exactly fov still counts.
  if (incidence_angle_rad < 0.0 || incidence_angle_rad > fov_rad * (1.0 + 1e-12)) {
    return 0.0;
  }
  return params.concentrator_gain();
}

GeometryAngles link_geometry(const Eigen::Vector3d& tx, const Eigen::Vector3d& rx) {
  GeometryAngles g;
  g.distance = (tx - rx).norm();
  if (g.distance == 0.0) {
    throw DegenerateGeometry("link_geometry: transmitter and receiver coincide");
  }
  // Both angles measured from the vertical axis.
  const double c = (tx.z() - rx.z()) / g.distance;
  g.emission_cos = c;
  g.incidence_cos = c;
  return g;
}

double los_gain(const Eigen::Vector3d& tx, const Eigen::Vector3d& rx,
                const VlcParams& params) {
  const GeometryAngles g = link_geometry(tx, rx);
  if (g.incidence_cos <= 0.0) return 0.0;  // receiver level with or above transmitter
  const double fov_rad = deg2rad(params.fov);
  const double incidence = std::acos(std::min(1.0, std::max(-1.0, g.incidence_cos)));
  if (incidence > fov_rad * (1.0 + 1e-12)) return 0.0;

  const double k = params.lambertian_order();
  return (k + 1.0) * params.pd_area / (2.0 * kPi * g.distance * g.distance) *
         std::pow(g.emission_cos, k) * params.concentrator_gain() * g.incidence_cos;
}

Eigen::VectorXcd array_response(double direction_cosine, int elements,
                                double spacing, double wavelength) {
  Eigen::VectorXcd a(elements);
  const double step = -2.0 * kPi / wavelength * spacing * direction_cosine;
  for (int m = 0; m < elements; ++m) {
    a(m) = std::polar(1.0, step * m);
  }
  return a;
}

ChannelVector ur_channel(const Scenario& s, const Eigen::Vector2d& q, int ris) {
  const Eigen::Vector3d tx = s.uav_position(q);
  const Eigen::Vector3d rx = s.ris_position(ris);
  ChannelVector cv;
  cv.path_loss = los_gain(tx, rx, s.vlc);
  const double cosine = (rx.x() - tx.x()) / (tx - rx).norm();
  cv.entries = cv.path_loss *
               array_response(cosine, s.ris_elements, s.vlc.element_spacing,
                              s.vlc.carrier_wavelength);
  return cv;
}

ChannelVector rg_channel(const Scenario& s, int ris, int user) {
  const Eigen::Vector3d tx = s.ris_position(ris);
  const Eigen::Vector3d rx = s.user_position(user);
  ChannelVector cv;
  cv.path_loss = los_gain(tx, rx, s.vlc);
  const double cosine = (rx.x() - tx.x()) / (tx - rx).norm();
  cv.entries = cv.path_loss *
               array_response(cosine, s.ris_elements, s.vlc.element_spacing,
                              s.vlc.carrier_wavelength);
  return cv;
}

std::complex<double> reflected_term(const Scenario& s, const Eigen::Vector2d& q,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta_row,
                                    int ris, int user) {
  const ChannelVector ur = ur_channel(s, q, ris);
  const ChannelVector rg = rg_channel(s, ris, user);
  std::complex<double> sum(0.0, 0.0);
  for (int m = 0; m < s.ris_elements; ++m) {
    sum += std::conj(rg.entries(m)) * std::polar(1.0, theta_row(m)) * ur.entries(m);
  }
  return sum;
}

double aggregate_gain(const Scenario& s, const Eigen::Vector2d& q,
                      const PhaseMatrix& phases,
                      const Eigen::Ref<const Eigen::RowVectorXi>& ris_row, int user) {
  std::complex<double> total(los_gain(s.uav_position(q), s.user_position(user), s.vlc),
                             0.0);
  for (int l = 0; l < s.ris_count(); ++l) {
    if (ris_row(l) == 0) continue;
    total += reflected_term(s, q, phases.theta.row(l), l, user);
  }
  return std::abs(total);
}

}  // namespace uavlc
