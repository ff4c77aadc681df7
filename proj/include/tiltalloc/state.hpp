#pragma once

#include "tiltalloc/types.hpp"

namespace tiltalloc {

/// Rigid-body state. Position/velocity in the inertial NED frame,
/// attitude as the body-to-inertial rotation, angular rate in body axes.
struct RigidBodyState {
  Vec3 position = Vec3::Zero();      // m, NED
  Vec3 velocity = Vec3::Zero();      // m/s, inertial
  Quat attitude = Quat::Identity();  // body -> inertial
  Vec3 angular_rate = Vec3::Zero();  // rad/s, body

  /// Air-relative velocity expressed in body axes (still air).
  Vec3 body_velocity() const { return attitude.conjugate() * velocity; }

  double roll() const;   // rad, ZYX convention
  double pitch() const;  // rad
  double yaw() const;    // rad

  static RigidBodyState level_at(const Vec3& position_ned);
  /// Level-wings state pitched nose-up by theta, flying level at speed va.
  static RigidBodyState pitched_level_flight(double theta, double va, const Vec3& position_ned);
};

/// Air-data quantities derived from the body-frame airspeed vector.
struct AeroState {
  double airspeed = 0.0;          // m/s
  double alpha = 0.0;             // rad, angle of attack
  double beta = 0.0;              // rad, sideslip
  double dynamic_pressure = 0.0;  // Pa
};

/// Rotation taking wind-frame vectors into body axes.
Mat3 wind_to_body(double alpha, double beta);

}  // namespace tiltalloc
