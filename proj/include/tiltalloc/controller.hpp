#pragma once

#include "tiltalloc/model.hpp"
#include "tiltalloc/trim.hpp"

namespace tiltalloc::sim {

using alloc::FlightPhase;

/// What the vehicle is asked to do. Hover uses position + yaw; cruise
/// uses altitude, airspeed, heading and a straight ground track along
/// the heading through (0, track_offset_y).
struct FlightSetpoint {
  Vec3 hover_position = Vec3(0, 0, -20);  // m, NED
  double yaw = 0.0;                       // rad
  double cruise_altitude = 50.0;          // m above origin
  double cruise_airspeed = 20.0;          // m/s
  double cruise_heading = 0.0;            // rad
  double track_offset_y = 0.0;            // m
};

struct ControllerGains {
  // hover cascade
  double pos_p = 1.0;      // 1/s
  // Velocity crossover must sit below the attitude loop's lag: bank is
  // the only lateral actuator, and after a failure the roll axis can be
  // tilt-lag limited, so sway feedback above ~1.5 rad/s goes unstable.
  double vel_p = 1.5;      // 1/s, horizontal axes
  // The vertical axis has collective thrust behind it directly - no bank
  // in the loop - so it keeps a fast gain and its own headroom.
  double vel_p_z = 3.0;    // 1/s
  double vel_i = 0.4;      // 1/s^2
  double vel_limit = 4.0;  // m/s, per horizontal/vertical split
  // Lateral acceleration is bought with bank, and bank leaks gravity
  // into the body-y axis no thrust can serve; 2.5 m/s^2 caps commanded
  // bank near 14 deg, which keeps the sway/roll couple well damped.
  double acc_limit = 2.5;    // m/s^2, horizontal
  double acc_limit_z = 4.0;  // m/s^2, vertical
  double att_p = 4.5;      // 1/s
  double rate_limit = 1.5; // rad/s
  Vec3 rate_p = Vec3(5.0, 5.0, 3.5);    // 1/s, per body axis
  // Roll/pitch rate damping sized for the failed-posture pendulum: after
  // a rotor-out the roll axis is served through tilt servos, and the
  // sway/roll couple it leaves is lightly damped without a strong D term.
  Vec3 rate_d = Vec3(0.45, 0.45, 0.0);  // s

  // cruise cascade
  double speed_p = 1.2;        // N per m/s
  double speed_i = 0.25;       // N per m
  double alt_p = 0.28;         // 1/s, altitude error to climb-rate setpoint
  double climb_limit = 2.5;    // m/s
  double climb_p = 4.0;        // N per m/s, climb-rate error to upward force
  double climb_i = 1.2;        // N per m
  double pitch_from_climb = 0.05;  // rad per m/s of climb-rate error
  double pitch_cmd_limit = 0.35;   // rad around trim pitch
  double heading_p = 1.0;          // 1/s
  double roll_cmd_limit = 0.5;     // rad
  double xtrack_p = 0.012;         // rad of heading per m of cross-track error
  double xtrack_limit = 0.35;      // rad

  // output envelope
  Vec3 moment_limit = Vec3(6.0, 6.0, 2.5);  // N*m
  Vec3 force_limit = Vec3(14.0, 8.0, 60.0); // N, body axes, deviation from trim force
};

/**
 * Cascaded flight controller: position -> velocity -> attitude -> rate,
 * emitting the total wrench the allocator should realize (equilibrium
 * wrench is zero, so this is also the deviation from trim). Integrators
 * live inside; output is clamped to the configured wrench envelope.
 */
class Controller {
 public:
  Controller(const ControllerGains& gains, const VehicleParams& params, const Mat3& inertia)
      : gains_(gains), params_(params), inertia_(inertia) {}

  /// Trim attitude/thrust reference for the cruise loops.
  void set_cruise_reference(double trim_pitch) { trim_pitch_ = trim_pitch; }

  Wrench update(const RigidBodyState& s, const FlightSetpoint& sp, FlightPhase phase, double dt);

  void reset();

 private:
  Wrench hover_wrench(const RigidBodyState& s, const FlightSetpoint& sp, double dt);
  Wrench cruise_wrench(const RigidBodyState& s, const FlightSetpoint& sp, double dt);
  Vec3 attitude_rate_loop(const RigidBodyState& s, const Quat& q_des, double dt);

  ControllerGains gains_;
  VehicleParams params_;
  Mat3 inertia_;
  double trim_pitch_ = 0.0;

  Vec3 vel_int_ = Vec3::Zero();
  double speed_int_ = 0.0;
  double climb_int_ = 0.0;
  Vec3 prev_rate_err_ = Vec3::Zero();
  bool have_prev_rate_ = false;
};

}  // namespace tiltalloc::sim
