#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tiltalloc/allocator.hpp"
#include "tiltalloc/controller.hpp"

namespace tiltalloc::sim {

/// Plant-side constants of the desk simulation.
struct SimParams {
  double dt = 0.004;            // s, integration and control step
  Vec3 inertia_diag = Vec3(0.45, 0.45, 0.70);  // kg*m^2
  double rotor_lag = 0.05;      // s, first-order actuator time constants
  double tilt_lag = 0.20;       // s
  double surface_lag = 0.05;    // s
  double v_transition = 14.0;   // m/s, forward-transition completion speed
  double tilt_align_tol = 2.0 * M_PI / 180.0;  // rad, tilt-at-endpoint tolerance
  double crash_attitude = 75.0 * M_PI / 180.0; // rad, |roll| or |pitch| beyond this is a crash
  double converge_rate_frac = 0.01;  // fraction of range/s counted as "still moving"
  double converge_hold = 2.0;        // s the actuators must stay quiet
};

/// A jammed or dead actuator injected into a run.
struct FailureSpec {
  int index = -1;      // flat actuator index
  double value = 0.0;  // physical lock value, u units
  double time = 0.0;   // s, injection time
  bool informed = true;  // whether the allocator is told
};

enum class MissionKind { kHoverHold, kCruiseHold, kFullMission };

const char* mission_name(MissionKind m);

struct Scenario {
  std::string name = "unnamed";
  MissionKind mission = MissionKind::kHoverHold;
  double duration = 30.0;  // s
  std::uint64_t seed = 1;
  FlightSetpoint setpoint;
  std::vector<FailureSpec> failures;
  // full-mission timing: when the forward / back transitions are commanded
  double transition_fw_time = 5.0;
  double transition_mc_time = 1e9;
};

/// One row of the run trace, written every control step.
struct TraceRecord {
  double t = 0.0;
  RigidBodyState body;
  AeroState aero;
  FlightPhase phase = FlightPhase::kMultirotor;
  ActuatorVector u_cmd = ActuatorVector::Zero();
  ActuatorVector u_eff = ActuatorVector::Zero();
  Vec6 w_desired = Vec6::Zero();   // controller output (total wrench target)
  Vec6 w_achieved = Vec6::Zero();  // model wrench at u_cmd in the current state
  double objective = 0.0;
  double residual = 0.0;
  int saturated = 0;
};

struct RunSummary {
  std::string name;
  bool crash = false;
  double crash_time = -1.0;
  double time_to_converge = -1.0;   // s after injection; -1 = never converged
  double max_attitude_dev = 0.0;    // deg, vs the pre-injection attitude
  double altitude_variation = 0.0;  // m, post-injection max minus min
  int saturation_count = 0;
  double max_cross_track = 0.0;     // m, cruise missions
  double max_heading_dev = 0.0;     // deg, cruise missions
  double mean_front_tilt = 0.0;     // rad, last 5 s
  double mean_rear_tilt = 0.0;      // rad, last 5 s
};

struct SimRunResult {
  std::vector<TraceRecord> trace;
  RunSummary summary;
};

struct FullConfig;  // forward declaration, defined in config.hpp

/// Advance the rigid body one step under a fixed effective input:
/// RK4 on the 13-state ODE, attitude renormalized afterwards.
RigidBodyState step_dynamics(const RigidBodyState& s, const ActuatorVector& u_eff, double dt,
                             const VehicleParams& p, const RotorGeometry& g,
                             const Mat3& inertia);

/// First-order actuator lag, exact discretization, followed by the
/// failure clamps that are active at time t.
ActuatorVector apply_actuator_dynamics(const ActuatorVector& u_eff, const ActuatorVector& u_cmd,
                                       double dt, const SimParams& sp,
                                       const std::vector<FailureSpec>& failures, double t);

/// Phase progression: transitions complete when airspeed crosses
/// v_transition and every tilt sits within tilt_align_tol of its
/// endpoint (forward: +90 deg, back: 0).
FlightPhase phase_machine(FlightPhase current, const AeroState& aero, const Vec12& u_eff,
                          bool fw_commanded, bool mc_commanded, const SimParams& sp);

/// Closed-loop run of one scenario. Deterministic for a fixed config.
SimRunResult run_scenario(const Scenario& scenario, const VehicleParams& p,
                          const RotorGeometry& g, const ActuatorBounds& bounds,
                          const alloc::AllocatorSettings& alloc_settings,
                          const ControllerGains& gains, const SimParams& sim_params);

}  // namespace tiltalloc::sim
