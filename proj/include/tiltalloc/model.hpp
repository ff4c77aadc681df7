#pragma once

#include <utility>

#include "tiltalloc/params.hpp"
#include "tiltalloc/state.hpp"
#include "tiltalloc/types.hpp"

namespace tiltalloc::model {

/// Airspeed below which incidence angles are treated as zero.
inline constexpr double kMinAirspeed = 0.1;  // m/s

/// Thrust (N) and shaft reaction torque (N*m, signed by spin direction)
/// of one rotor at speed w.
struct RotorOutput {
  double thrust = 0.0;
  double torque = 0.0;
};
RotorOutput rotor_thrust_torque(double rotor_speed, int spin_dir, const VehicleParams& p);

/// Thrust axis of rotor i in body frame for tilt angle chi:
/// straight up at chi = 0, straight forward at chi = +90 deg.
inline Vec3 tilt_axis(double chi) { return {std::sin(chi), 0.0, -std::cos(chi)}; }

/// Gravity in body axes. Requires a normalized attitude quaternion.
Vec3 gravity_force(const Quat& attitude, const VehicleParams& p);

/// Resultant rotor thrust in body axes.
Vec3 thrust_force(const ActuatorVector& u, const VehicleParams& p);

/// Incidence angles and dynamic pressure from the body-frame airspeed
/// vector. Angles snap to zero below kMinAirspeed.
AeroState aero_angles(const Vec3& body_airspeed, const VehicleParams& p);

/// Wing lift and drag mapped to body axes. Drag opposes the airspeed
/// vector, lift acts upward in the wind frame.
Vec3 aero_force(const AeroState& aero, const VehicleParams& p);

/// Moment of the rotor thrusts about the center of mass.
Vec3 thrust_moment(const ActuatorVector& u, const RotorGeometry& g, const VehicleParams& p);

/// Net shaft reaction torque of the rotors, along their tilt axes.
Vec3 resisting_moment(const ActuatorVector& u, const RotorGeometry& g, const VehicleParams& p);

/// Control-surface moments: differential aileron roll, elevator pitch,
/// rudder yaw. Scales with dynamic pressure.
Vec3 aero_moment(const AeroState& aero, const ActuatorVector& u, const VehicleParams& p);

/// Differential aileron deflection (da1 - da2) / 2.
inline double aileron_differential(const ActuatorVector& u) {
  return 0.5 * (u[kAileron1] - u[kAileron2]);
}

/// Full nonlinear wrench: sum of the six force/moment terms above,
/// evaluated at actuator input u and rigid-body state s.
Wrench total_wrench(const ActuatorVector& u, const RigidBodyState& s, const RotorGeometry& g,
                    const VehicleParams& p);

/// total_wrench minus the gravity term: the input-dependent part the
/// allocator can actually command.
Wrench controlled_wrench(const ActuatorVector& u, const RigidBodyState& s, const RotorGeometry& g,
                         const VehicleParams& p);

}  // namespace tiltalloc::model
