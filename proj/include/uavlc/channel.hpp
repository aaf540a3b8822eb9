#pragma once

#include <complex>

#include "uavlc/types.hpp"

namespace uavlc {

// Complex gain vector of one reflecting surface hop. All entries share the
// real Lambertian path loss; only the inter-element phase progression varies,
// so |entries[m]| == path_loss and entries[0] == path_loss.
struct ChannelVector {
  Eigen::VectorXcd entries;
  double path_loss = 0.0;
};

// Geometry of a single link, angles expressed through their cosines.
struct GeometryAngles {
  double distance = 0.0;
  double emission_cos = 0.0;
  double incidence_cos = 0.0;
  double direction_cosine = 0.0;
};

/// Lambertian emission order -ln(2)/ln(cos(semi_angle)). Angle in degrees,
/// valid on (0, 90); throws DomainError outside.
double lambertian_order(double semi_angle_deg);

/// Optical concentrator gain: n^2/sin^2(fov) inside the field of view,
/// zero beyond it. Angle in radians.
double concentrator_gain(double incidence_angle_rad, const VlcParams& params);

/// Line-of-sight Lambertian gain between two points. Emission and incidence
/// angles are both measured from the vertical axis (transmitter boresight
/// points down, receiver normal points up), which makes them equal here.
/// Returns zero outside the receiver field of view (closed at the boundary)
/// or when the receiver is not below the transmitter.
/// Throws DegenerateGeometry when the points coincide.
double los_gain(const Eigen::Vector3d& tx, const Eigen::Vector3d& rx,
                const VlcParams& params);

/// Link geometry used by los_gain, exposed for diagnostics and linearization.
GeometryAngles link_geometry(const Eigen::Vector3d& tx, const Eigen::Vector3d& rx);

/// Uniform-linear-array response: entry m = exp(-i * 2*pi/lambda * d * m * cosine),
/// m = 0..elements-1.
Eigen::VectorXcd array_response(double direction_cosine, int elements,
                                double spacing, double wavelength);

/// UAV -> surface hop: Lambertian path loss times the array response at the
/// arrival direction cosine (a_l - x_i)/d_il.
ChannelVector ur_channel(const Scenario& s, const Eigen::Vector2d& q, int ris);

/// Surface -> user hop: Lambertian path loss times the array response at the
/// departure direction cosine (v_j - a_l)/d_lj.
ChannelVector rg_channel(const Scenario& s, int ris, int user);

/// Scalar reflected contribution (h_rg)^H * diag(e^{i theta}) * h_ur of one
/// surface for one UAV/user pair.
std::complex<double> reflected_term(const Scenario& s, const Eigen::Vector2d& q,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta_row,
                                    int ris, int user);

/// Total channel gain seen by `user` from a UAV at `q`: magnitude of the
/// direct gain plus the reflected contributions of every surface in the
/// UAV's association row.
double aggregate_gain(const Scenario& s, const Eigen::Vector2d& q,
                      const PhaseMatrix& phases,
                      const Eigen::Ref<const Eigen::RowVectorXi>& ris_row, int user);

}  // namespace uavlc
