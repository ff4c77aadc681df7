#include "tiltalloc/params.hpp"

#include <cmath>

namespace tiltalloc {

const std::array<std::string, kNumActuators>& actuator_names() {
  static const std::array<std::string, kNumActuators> names = {
      "rotor1", "rotor2", "rotor3", "rotor4", "tilt1",    "tilt2",
      "tilt3",  "tilt4",  "aileron1", "aileron2", "elevator", "rudder"};
  return names;
}

ActuatorBounds default_bounds() {
  ActuatorBounds b;
  const double deg = M_PI / 180.0;
  for (int i = kRotor1; i <= kRotor4; ++i) {
    b.lower[i] = 0.0;
    b.upper[i] = 1200.0;
  }
  for (int i = kTilt1; i <= kTilt4; ++i) {
    b.lower[i] = -45.0 * deg;
    b.upper[i] = 135.0 * deg;
  }
  for (int i = kAileron1; i <= kRudder; ++i) {
    b.lower[i] = -30.0 * deg;
    b.upper[i] = 30.0 * deg;
  }
  return b;
}

}  // namespace tiltalloc
