#include "tiltalloc/state.hpp"

#include <cmath>

namespace tiltalloc {

double RigidBodyState::roll() const {
  const Quat& q = attitude;
  return std::atan2(2.0 * (q.w() * q.x() + q.y() * q.z()),
                    1.0 - 2.0 * (q.x() * q.x() + q.y() * q.y()));
}

double RigidBodyState::pitch() const {
  const Quat& q = attitude;
  double s = 2.0 * (q.w() * q.y() - q.z() * q.x());
  s = std::clamp(s, -1.0, 1.0);
  return std::asin(s);
}

double RigidBodyState::yaw() const {
  const Quat& q = attitude;
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()),
                    1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

RigidBodyState RigidBodyState::level_at(const Vec3& position_ned) {
  RigidBodyState s;
  s.position = position_ned;
  return s;
}

RigidBodyState RigidBodyState::pitched_level_flight(double theta, double va,
                                                    const Vec3& position_ned) {
  RigidBodyState s;
  s.position = position_ned;
  s.velocity = Vec3(va, 0.0, 0.0);
  s.attitude = Quat(Eigen::AngleAxisd(theta, Vec3::UnitY()));
  return s;
}

Mat3 wind_to_body(double alpha, double beta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  // Transpose of the body-to-wind map that sends the airspeed vector
  // [ca*cb, sb, sa*cb] * V onto [V, 0, 0].
  Mat3 r;
  r << ca * cb, -ca * sb, -sa,  //
      sb, cb, 0.0,              //
      sa * cb, -sa * sb, ca;
  return r;
}

}  // namespace tiltalloc
