#include "tiltalloc/controller.hpp"

#include <algorithm>
#include <cmath>

namespace tiltalloc::sim {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec3(v * (limit / n)) : v;
}

// Horizontal norm and vertical magnitude clamped independently, so a
// large lateral demand cannot starve the vertical axis (or vice versa).
Vec3 clamp_split(const Vec3& v, double limit_xy, double limit_z) {
  Vec3 out = v;
  const double h = std::hypot(out.x(), out.y());
  if (h > limit_xy) {
    out.x() *= limit_xy / h;
    out.y() *= limit_xy / h;
  }
  out.z() = clamp(out.z(), -limit_z, limit_z);
  return out;
}

Quat euler_zyx(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

}  // namespace

void Controller::reset() {
  vel_int_.setZero();
  speed_int_ = 0.0;
  climb_int_ = 0.0;
  prev_rate_err_.setZero();
  have_prev_rate_ = false;
}

Vec3 Controller::attitude_rate_loop(const RigidBodyState& s, const Quat& q_des, double dt) {
  // Attitude error as a body-frame rotation vector, shortest direction.
  Quat qe = s.attitude.conjugate() * q_des;
  if (qe.w() < 0.0) qe.coeffs() = -qe.coeffs();
  const Vec3 att_err = 2.0 * qe.vec();

  Vec3 rate_sp = clamp_norm(gains_.att_p * att_err, gains_.rate_limit);
  const Vec3 rate_err = rate_sp - s.angular_rate;

  Vec3 accel_des = gains_.rate_p.cwiseProduct(rate_err);
  if (have_prev_rate_ && dt > 0.0) {
    accel_des += gains_.rate_d.cwiseProduct((rate_err - prev_rate_err_) / dt);
  }
  prev_rate_err_ = rate_err;
  have_prev_rate_ = true;

  // Physical moment: rigid-body feedforward keeps the loop exact at rate.
  return inertia_ * accel_des + s.angular_rate.cross(inertia_ * s.angular_rate);
}

Wrench Controller::hover_wrench(const RigidBodyState& s, const FlightSetpoint& sp, double dt) {
  const Vec3 pos_err = sp.hover_position - s.position;
  const Vec3 vel_sp =
      clamp_split(gains_.pos_p * pos_err, gains_.vel_limit, gains_.vel_limit);
  const Vec3 vel_err = vel_sp - s.velocity;

  vel_int_ += gains_.vel_i * vel_err * dt;
  vel_int_ = clamp_split(vel_int_, 0.5 * gains_.acc_limit, 0.5 * gains_.acc_limit_z);
  const Vec3 acc_raw(gains_.vel_p * vel_err.x(), gains_.vel_p * vel_err.y(),
                     gains_.vel_p_z * vel_err.z());
  const Vec3 acc_des = clamp_split(acc_raw + vel_int_, gains_.acc_limit, gains_.acc_limit_z);

  // Attitude tracks the controlled-force direction (total minus gravity):
  // thrust points along body -z, so desired body z is its opposite.
  const Vec3 f_ctrl = params_.mass * acc_des - Vec3(0, 0, params_.weight());
  Vec3 z_des = -f_ctrl;
  if (z_des.norm() < 0.1 * params_.weight()) z_des = Vec3(0, 0, -1);
  z_des.normalize();
  const Vec3 x_yaw(std::cos(sp.yaw), std::sin(sp.yaw), 0.0);
  Vec3 y_des = z_des.cross(x_yaw);
  if (y_des.norm() < 1e-6) y_des = Vec3(0, 1, 0);
  y_des.normalize();
  const Vec3 x_des = y_des.cross(z_des);
  Mat3 r_des;
  r_des.col(0) = x_des;
  r_des.col(1) = y_des;
  r_des.col(2) = z_des;

  Wrench w;
  w.moment = attitude_rate_loop(s, Quat(r_des), dt);

  // Desired total force (zero in steady hover), expressed in body axes.
  // Only the thrust-capable axes are commanded; lateral force comes from
  // attitude, not allocation.
  const Vec3 f_total_body = s.attitude.conjugate() * (params_.mass * acc_des);
  w.force = Vec3(f_total_body.x(), 0.0, f_total_body.z());
  return w;
}

Wrench Controller::cruise_wrench(const RigidBodyState& s, const FlightSetpoint& sp, double dt) {
  const AeroState aero = model::aero_angles(s.body_velocity(), params_);

  // Airspeed -> forward force.
  const double speed_err = sp.cruise_airspeed - aero.airspeed;
  speed_int_ = clamp(speed_int_ + gains_.speed_i * speed_err * dt, -6.0, 6.0);
  const double fx = gains_.speed_p * speed_err + speed_int_;

  // Altitude -> climb rate -> upward force and a pitch-trim offset.
  const double altitude = -s.position.z();
  const double climb = -s.velocity.z();
  const double climb_sp =
      clamp(gains_.alt_p * (sp.cruise_altitude - altitude), -gains_.climb_limit, gains_.climb_limit);
  const double climb_err = climb_sp - climb;
  climb_int_ = clamp(climb_int_ + gains_.climb_i * climb_err * dt, -8.0, 8.0);
  const double f_up = gains_.climb_p * climb_err + climb_int_;
  const double pitch_cmd =
      trim_pitch_ + clamp(gains_.pitch_from_climb * climb_err, -gains_.pitch_cmd_limit,
                          gains_.pitch_cmd_limit);

  // Ground track: steer the heading toward the line through
  // (0, track_offset_y) along the commanded heading.
  const double cpsi = std::cos(sp.cruise_heading), spsi = std::sin(sp.cruise_heading);
  const double rel_x = s.position.x();
  const double rel_y = s.position.y() - sp.track_offset_y;
  const double cross_track = rel_x * spsi - rel_y * cpsi;  // left of track positive
  const double heading_cmd =
      sp.cruise_heading + clamp(gains_.xtrack_p * cross_track, -gains_.xtrack_limit,
                                gains_.xtrack_limit);

  // Coordinated turn: bank proportional to heading error at this speed.
  const double heading_err = wrap_angle(heading_cmd - s.yaw());
  const double va = std::max(aero.airspeed, 5.0);
  const double roll_cmd = clamp(std::atan2(va * gains_.heading_p * heading_err, params_.gravity),
                                -gains_.roll_cmd_limit, gains_.roll_cmd_limit);

  Wrench w;
  w.moment = attitude_rate_loop(s, euler_zyx(roll_cmd, pitch_cmd, heading_cmd), dt);
  w.force = Vec3(fx, 0.0, -f_up);
  return w;
}

Wrench Controller::update(const RigidBodyState& s, const FlightSetpoint& sp, FlightPhase phase,
                          double dt) {
  Wrench w = phase == FlightPhase::kFixedWing ? cruise_wrench(s, sp, dt)
                                              : hover_wrench(s, sp, dt);
  for (int i = 0; i < 3; ++i) {
    w.moment[i] = clamp(w.moment[i], -gains_.moment_limit[i], gains_.moment_limit[i]);
    w.force[i] = clamp(w.force[i], -gains_.force_limit[i], gains_.force_limit[i]);
  }
  return w;
}

}  // namespace tiltalloc::sim
