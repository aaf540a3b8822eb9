#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace uavlc {

// Physical-layer constants of the optical link. Lengths are meters, angles
// are degrees in this struct (converted to radians at the point of use),
// powers are watts.
struct VlcParams {
  double semi_angle_half_power = 80.0;  // transmitter half-power semi-angle, in (0, 90)
  double pd_area = 1e-4;                // photodetector area, m^2
  double fov = 90.0;                    // receiver field of view, in (0, 90]
  double refractive_index = 4.5;        // concentrator internal refractive index
  double responsivity = 0.9;            // A/W
  double noise_power = 1e-12;           // W
  double carrier_wavelength = 5e-7;     // m
  double element_spacing = 2.5e-7;      // m; half the carrier wavelength by default

  /// Lambertian emission order derived from the half-power semi-angle.
  double lambertian_order() const;

  /// In-field concentrator gain n^2 / sin^2(fov).
  double concentrator_gain() const;
};

// One problem instance: geometry, demands and physical constants.
// Users live at (x, y, 0), UAVs hover at altitude `uav_altitude`, reflecting
// surfaces sit at height `ris_height` with `ris_elements` elements each.
struct Scenario {
  int uav_count = 1;
  double uav_altitude = 20.0;
  Eigen::Matrix2Xd users;                // column j = ground position of user j
  Eigen::VectorXd illumination_demands;  // per-user demand, >= 0
  Eigen::Matrix2Xd ris_list;             // column l = ground position of surface l
  double ris_height = 5.0;
  int ris_elements = 1;
  Eigen::Vector2d area{100.0, 100.0};    // rectangle [0,w] x [0,h]
  double min_separation = 10.0;          // minimum UAV pairwise distance, m
  double rate_requirement = 25.0;        // bits/s/Hz, same for every user
  VlcParams vlc;

  int user_count() const { return static_cast<int>(users.cols()); }
  int ris_count() const { return static_cast<int>(ris_list.cols()); }

  Eigen::Vector3d uav_position(const Eigen::Vector2d& q) const {
    return {q.x(), q.y(), uav_altitude};
  }
  Eigen::Vector3d user_position(int j) const {
    return {users(0, j), users(1, j), 0.0};
  }
  Eigen::Vector3d ris_position(int l) const {
    return {ris_list(0, l), ris_list(1, l), ris_height};
  }
};

// Binary assignment of users and reflecting surfaces to UAVs.
// Every column of each matrix sums to exactly one.
struct Association {
  Eigen::MatrixXi user_assoc;  // D x U
  Eigen::MatrixXi ris_assoc;   // D x L
};

// Per-surface phase shifts, radians in [0, 2*pi). Row l holds the M shifts
// of surface l.
struct PhaseMatrix {
  Eigen::MatrixXd theta;

  static PhaseMatrix zeros(int ris, int elements) {
    PhaseMatrix p;
    p.theta = Eigen::MatrixXd::Zero(ris, elements);
    return p;
  }
};

// The four decision blocks plus the implied per-UAV transmit powers.
struct Solution {
  Eigen::Matrix2Xd deployment;  // column i = horizontal position of UAV i
  PhaseMatrix phases;           // ris_count x ris_elements
  Association assoc;
  Eigen::VectorXd powers;       // watts, >= 0; idle UAVs carry 0
};

}  // namespace uavlc
