#include "tiltalloc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tiltalloc::model {

RotorOutput rotor_thrust_torque(double rotor_speed, int spin_dir, const VehicleParams& p) {
  const double w2 = rotor_speed * rotor_speed;
  return {p.thrust_coeff * w2, spin_dir * p.torque_coeff * w2};
}

Vec3 gravity_force(const Quat& attitude, const VehicleParams& p) {
  if (std::abs(attitude.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("gravity_force: attitude quaternion must be normalized");
  }
  // conjugate() rotates inertial vectors into body axes.
  return attitude.conjugate() * Vec3(0.0, 0.0, p.weight());
}

Vec3 thrust_force(const ActuatorVector& u, const VehicleParams& p) {
  Vec3 f = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const double t = p.thrust_coeff * u[kRotor1 + i] * u[kRotor1 + i];
    f += t * tilt_axis(u[kTilt1 + i]);
  }
  return f;
}

AeroState aero_angles(const Vec3& body_airspeed, const VehicleParams& p) {
  AeroState a;
  a.airspeed = body_airspeed.norm();
  a.dynamic_pressure = 0.5 * p.air_density * a.airspeed * a.airspeed;
  if (a.airspeed >= kMinAirspeed) {
    a.alpha = std::atan2(body_airspeed.z(), body_airspeed.x());
    a.beta = std::asin(std::clamp(body_airspeed.y() / a.airspeed, -1.0, 1.0));
  }
  return a;
}

Vec3 aero_force(const AeroState& aero, const VehicleParams& p) {
  const double qs = aero.dynamic_pressure * p.wing_area;
  const double drag = qs * (p.drag_coeff0 + p.drag_coeff_alpha * aero.alpha * aero.alpha);
  const double lift = qs * (p.lift_coeff0 + p.lift_coeff_alpha * aero.alpha);
  // Drag along -x_wind, lift along -z_wind.
  return wind_to_body(aero.alpha, aero.beta) * Vec3(-drag, 0.0, -lift);
}

Vec3 thrust_moment(const ActuatorVector& u, const RotorGeometry& g, const VehicleParams& p) {
  Vec3 m = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const double t = p.thrust_coeff * u[kRotor1 + i] * u[kRotor1 + i];
    m += g.position[i].cross(t * tilt_axis(u[kTilt1 + i]));
  }
  return m;
}

Vec3 resisting_moment(const ActuatorVector& u, const RotorGeometry& g, const VehicleParams& p) {
  Vec3 m = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const double tau = g.spin_dir[i] * p.torque_coeff * u[kRotor1 + i] * u[kRotor1 + i];
    m += tau * tilt_axis(u[kTilt1 + i]);
  }
  return m;
}

Vec3 aero_moment(const AeroState& aero, const ActuatorVector& u, const VehicleParams& p) {
  const double qs = aero.dynamic_pressure * p.wing_area;
  return {qs * p.wingspan * p.aileron_eff * aileron_differential(u),
          qs * p.mean_chord * p.elevator_eff * u[kElevator],
          qs * p.wingspan * p.rudder_eff * u[kRudder]};
}

Wrench total_wrench(const ActuatorVector& u, const RigidBodyState& s, const RotorGeometry& g,
                    const VehicleParams& p) {
  Wrench w = controlled_wrench(u, s, g, p);
  w.force += gravity_force(s.attitude, p);
  return w;
}

Wrench controlled_wrench(const ActuatorVector& u, const RigidBodyState& s,
                         const RotorGeometry& g, const VehicleParams& p) {
  const AeroState aero = aero_angles(s.body_velocity(), p);
  Wrench w;
  w.force = thrust_force(u, p) + aero_force(aero, p);
  w.moment = thrust_moment(u, g, p) + resisting_moment(u, g, p) + aero_moment(aero, u, p);
  return w;
}

}  // namespace tiltalloc::model
