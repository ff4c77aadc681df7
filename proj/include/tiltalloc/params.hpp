#pragma once

#include <array>

#include "tiltalloc/types.hpp"

namespace tiltalloc {

/**
 * Physical constants of the airframe and its aerodynamic derivatives.
 * Defaults describe the reference 4.6 kg quad-tiltrotor testbed.
 */
struct VehicleParams {
  double mass = 4.6;           // kg
  double wingspan = 2.0;       // m
  double air_density = 1.225;  // kg/m^3
  double mean_chord = 0.22;    // m
  double wing_area = 0.44;     // m^2

  double thrust_coeff = 2.2164e-5;  // N/(rad/s)^2, thrust = c_F * w^2
  double torque_coeff = 1.1082e-6;  // N*m/(rad/s)^2, shaft drag torque = c_K * w^2

  double aileron_eff = 0.1173;   // roll moment coefficient per rad of differential aileron
  double elevator_eff = 0.5560;  // pitch moment coefficient per rad of elevator
  double rudder_eff = 0.0881;    // yaw moment coefficient per rad of rudder

  double lift_coeff0 = 0.35;       // lift coefficient at zero incidence
  double lift_coeff_alpha = 0.11;  // lift slope, 1/rad
  double drag_coeff0 = 0.01;       // parasitic drag coefficient
  double drag_coeff_alpha = 0.2;   // induced drag factor, 1/rad^2

  double gravity = 9.81;  // m/s^2

  double weight() const { return mass * gravity; }
};

/// Rotor placement and spin handedness. spin_dir = +1 or -1: the shaft
/// reaction torque on the airframe is spin_dir * c_K * w^2 along the
/// thrust axis. Opposite corners share a direction (quad-X layout).
struct RotorGeometry {
  std::array<Vec3, 4> position = {
      Vec3(0.25, 0.40, 0.0),    // rotor 1, front right
      Vec3(0.25, -0.40, 0.0),   // rotor 2, front left
      Vec3(-0.25, 0.40, 0.0),   // rotor 3, rear right
      Vec3(-0.25, -0.40, 0.0),  // rotor 4, rear left
  };
  std::array<int, 4> spin_dir = {+1, -1, -1, +1};
};

/// Default actuator box: rotors 0..1200 rad/s, tilts -45..+135 deg
/// (0 = thrust up, +90 deg = thrust forward), surfaces +/-30 deg.
ActuatorBounds default_bounds();

}  // namespace tiltalloc
