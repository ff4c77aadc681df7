#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

namespace tiltalloc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Quat = Eigen::Quaterniond;

/// Number of physical actuators: 4 rotor speeds, 4 tilt angles, 4 surfaces.
inline constexpr int kNumActuators = 12;

/// Flat actuator ordering used everywhere:
/// [w1 w2 w3 w4, chi1 chi2 chi3 chi4, da1 da2, de, dr]
enum ActuatorIndex : int {
  kRotor1 = 0,
  kRotor2 = 1,
  kRotor3 = 2,
  kRotor4 = 3,
  kTilt1 = 4,
  kTilt2 = 5,
  kTilt3 = 6,
  kTilt4 = 7,
  kAileron1 = 8,
  kAileron2 = 9,
  kElevator = 10,
  kRudder = 11,
};

inline bool is_rotor_channel(int i) { return i >= kRotor1 && i <= kRotor4; }
inline bool is_tilt_channel(int i) { return i >= kTilt1 && i <= kTilt4; }
inline bool is_surface_channel(int i) { return i >= kAileron1 && i <= kRudder; }

/// Short channel names, index-aligned with the flat ordering.
const std::array<std::string, kNumActuators>& actuator_names();

/// Actuator setpoint/effective-position vector in the flat ordering.
/// Rotor speeds in rad/s, all angles in rad.
using ActuatorVector = Vec12;

/// Per-channel box bounds on the actuator vector.
struct ActuatorBounds {
  ActuatorVector lower;
  ActuatorVector upper;

  double range(int i) const { return upper[i] - lower[i]; }
  bool contains(const ActuatorVector& u, double tol = 0.0) const {
    for (int i = 0; i < kNumActuators; ++i) {
      if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
    }
    return true;
  }
};

/// Body-frame wrench, moments first: [Mx My Mz | Fx Fy Fz].
struct Wrench {
  Vec3 moment = Vec3::Zero();  // N*m
  Vec3 force = Vec3::Zero();   // N

  Vec6 vec() const {
    Vec6 w;
    w << moment, force;
    return w;
  }
  static Wrench from_vec(const Vec6& w) { return {w.head<3>(), w.tail<3>()}; }

  Wrench operator+(const Wrench& o) const { return {moment + o.moment, force + o.force}; }
  Wrench operator-(const Wrench& o) const { return {moment - o.moment, force - o.force}; }
};

}  // namespace tiltalloc
