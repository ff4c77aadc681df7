#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltalloc/model.hpp"

namespace tiltalloc::alloc {

/// One jammed/dead actuator: channel index and the physical value it is
/// stuck at (u units: rad/s for rotors, rad for angles).
struct FailureInfo {
  int index = -1;
  double value = 0.0;
};

enum class FlightPhase {
  kMultirotor,
  kTransitionToFw,
  kFixedWing,
  kTransitionToMc,
};

const char* phase_name(FlightPhase phase);
std::optional<FlightPhase> phase_from_name(const std::string& name);

/// Steady operating point: actuator input u0 whose total wrench vanishes
/// at the stored state.
struct TrimPoint {
  RigidBodyState state;
  ActuatorVector u0 = ActuatorVector::Zero();
  double residual = 0.0;  // max |wrench component| at (u0, state)
  FlightPhase phase = FlightPhase::kMultirotor;
  double airspeed = 0.0;  // m/s, zero in hover
};

/// Raised when the trim search cannot reach the residual tolerance.
struct TrimNotFound : std::runtime_error {
  double best_residual;
  TrimNotFound(const std::string& what, double residual)
      : std::runtime_error(what), best_residual(residual) {}
};

/// Componentwise wrench residual every trim must meet.
inline constexpr double kTrimTolerance = 1e-6;

/// Hover: level attitude, tilts up, equal rotor speeds carrying the
/// weight. Closed form, no search.
TrimPoint find_hover_trim(const VehicleParams& p, const RotorGeometry& g,
                          const ActuatorBounds& bounds, const Vec3& position = Vec3(0, 0, -20));

/**
 * Hover with jammed/dead actuators pinned at their lock values. The
 * wrench balance is solved over the functioning rotor and tilt channels
 * by deterministic multi-start damped least squares; balanced postures
 * form families, and the returned member maximizes a posture score:
 * distance of every functioning channel from its limits (capped at ten
 * percent of range) plus the weakest-direction moment authority. The cap
 * matters: a dead rotor drags its diagonal twin toward idle, where the
 * roll/pitch map of the remaining pair is exactly singular, and the
 * score must prefer a spinning twin over a centimeter more box margin.
 * Throws TrimNotFound when no balanced posture meets kTrimTolerance.
 */
TrimPoint find_hover_trim(const VehicleParams& p, const RotorGeometry& g,
                          const ActuatorBounds& bounds, const std::vector<FailureInfo>& failures,
                          const Vec3& position = Vec3(0, 0, -20));

/**
 * Cruise: level flight at the given airspeed with tilts regularized
 * toward full forward. Solves the six-component wrench balance over the
 * actuator vector and the pitch attitude by damped least squares from a
 * deterministic start schedule. Throws TrimNotFound if no candidate
 * reaches kTrimTolerance on every component.
 *
 * `locked`: optional actuator index pinned at `locked_value` during the
 * search (a jammed surface or tilt changes where the balance sits).
 */
TrimPoint find_cruise_trim(const VehicleParams& p, const RotorGeometry& g,
                           const ActuatorBounds& bounds, double airspeed, int locked = -1,
                           double locked_value = 0.0, const Vec3& position = Vec3(0, 0, -50));

/// Cruise with every listed failure pinned; otherwise identical to the
/// single-lock search above.
TrimPoint find_cruise_trim(const VehicleParams& p, const RotorGeometry& g,
                           const ActuatorBounds& bounds, double airspeed,
                           const std::vector<FailureInfo>& failures,
                           const Vec3& position = Vec3(0, 0, -50));

}  // namespace tiltalloc::alloc
