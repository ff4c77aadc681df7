#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tiltalloc/config.hpp"
#include "tiltalloc/trim.hpp"

using namespace tiltalloc;
using doctest::Approx;

namespace {

struct Rig {
  VehicleParams p;
  RotorGeometry g;
  ActuatorBounds bounds = default_bounds();
  alloc::AllocatorSettings alloc_settings;
  sim::ControllerGains gains;
  sim::SimParams sp;

  sim::SimRunResult run(const sim::Scenario& sc) const {
    return sim::run_scenario(sc, p, g, bounds, alloc_settings, gains, sp);
  }
};

sim::Scenario hover_motor_out(bool informed, double duration) {
  sim::Scenario sc;
  sc.name = "motor_out";
  sc.mission = sim::MissionKind::kHoverHold;
  sc.duration = duration;
  sc.failures.push_back({kRotor1, 0.0, 2.0, informed});
  return sc;
}

}  // namespace

TEST_CASE("one dynamics step from rest is a pure gravity drop") {
  const Rig rig;
  const Mat3 inertia = rig.sp.inertia_diag.asDiagonal();
  const RigidBodyState s0 = RigidBodyState::level_at(Vec3(0, 0, -20));
  const double dt = 1e-3;

  const RigidBodyState s1 =
      sim::step_dynamics(s0, ActuatorVector::Zero(), dt, rig.p, rig.g, inertia);

  // Constant acceleration integrates exactly under RK4; the only
  // deviation is the vanishing aero force picked up at mm/s airspeed.
  CHECK(s1.velocity.z() == Approx(rig.p.gravity * dt).epsilon(1e-8));
  CHECK(s1.position.z() == Approx(-20.0 + 0.5 * rig.p.gravity * dt * dt).epsilon(1e-10));
  CHECK(s1.velocity.head<2>().norm() < 1e-8);
  CHECK(s1.angular_rate.norm() < 1e-10);
  CHECK(std::abs(s1.attitude.dot(s0.attitude)) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hover trim is a fixed point of the plant") {
  const Rig rig;
  const Mat3 inertia = rig.sp.inertia_diag.asDiagonal();
  const alloc::TrimPoint trim = alloc::find_hover_trim(rig.p, rig.g, rig.bounds);

  RigidBodyState s = trim.state;
  for (int k = 0; k < 250; ++k) {
    s = sim::step_dynamics(s, trim.u0, rig.sp.dt, rig.p, rig.g, inertia);
  }
  CHECK(s.velocity.norm() < 1e-9);
  CHECK(s.angular_rate.norm() < 1e-9);
  CHECK((s.position - trim.state.position).norm() < 1e-9);
}

TEST_CASE("actuator lag is the exact first-order discretization") {
  const Rig rig;
  const ActuatorVector from = ActuatorVector::Zero();
  const ActuatorVector to = ActuatorVector::Ones();
  const double dt = rig.sp.dt;
  const ActuatorVector one = sim::apply_actuator_dynamics(from, to, dt, rig.sp, {}, 0.0);

  for (int i = 0; i < kNumActuators; ++i) {
    const double tau = is_rotor_channel(i)  ? rig.sp.rotor_lag
                       : is_tilt_channel(i) ? rig.sp.tilt_lag
                                            : rig.sp.surface_lag;
    CHECK(one[i] == Approx(1.0 - std::exp(-dt / tau)).epsilon(1e-14));
  }

  // Exact discretization composes: two half steps equal one full step.
  const ActuatorVector half = sim::apply_actuator_dynamics(from, to, dt / 2, rig.sp, {}, 0.0);
  const ActuatorVector two = sim::apply_actuator_dynamics(half, to, dt / 2, rig.sp, {}, 0.0);
  CHECK((two - one).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("failure clamps activate on time and override the lag") {
  const Rig rig;
  const std::vector<sim::FailureSpec> failures = {{kRotor1, 0.0, 1.0, true},
                                                  {kElevator, 0.1, 2.0, false}};
  ActuatorVector u = ActuatorVector::Constant(0.5);
  const ActuatorVector cmd = ActuatorVector::Ones();

  const ActuatorVector before = sim::apply_actuator_dynamics(u, cmd, rig.sp.dt, rig.sp,
                                                             failures, 0.5);
  CHECK(before[kRotor1] > 0.5);  // still healthy, moving toward the command

  const ActuatorVector first = sim::apply_actuator_dynamics(u, cmd, rig.sp.dt, rig.sp,
                                                            failures, 1.0);
  CHECK(first[kRotor1] == 0.0);     // bit-exact clamp, informed or not
  CHECK(first[kElevator] > 0.5);    // second failure not yet active

  const ActuatorVector both = sim::apply_actuator_dynamics(u, cmd, rig.sp.dt, rig.sp,
                                                           failures, 2.0);
  CHECK(both[kRotor1] == 0.0);
  CHECK(both[kElevator] == 0.1);
}

TEST_CASE("phase machine completes transitions only on speed and tilt alignment") {
  using alloc::FlightPhase;
  const Rig rig;
  AeroState slow, fast;
  slow.airspeed = 5.0;
  fast.airspeed = rig.sp.v_transition + 1.0;
  Vec12 tilts_up = Vec12::Zero();
  Vec12 tilts_fwd = Vec12::Zero();
  for (int i = kTilt1; i <= kTilt4; ++i) tilts_fwd[i] = M_PI / 2.0;
  Vec12 tilts_almost = tilts_fwd;
  tilts_almost[kTilt2] = M_PI / 2.0 - 2.0 * rig.sp.tilt_align_tol;  // one servo lags

  auto step = [&](FlightPhase ph, const AeroState& a, const Vec12& u, bool fw, bool mc) {
    return sim::phase_machine(ph, a, u, fw, mc, rig.sp);
  };

  CHECK(step(FlightPhase::kMultirotor, slow, tilts_up, false, false) ==
        FlightPhase::kMultirotor);
  CHECK(step(FlightPhase::kMultirotor, slow, tilts_up, true, false) ==
        FlightPhase::kTransitionToFw);
  CHECK(step(FlightPhase::kTransitionToFw, slow, tilts_fwd, true, false) ==
        FlightPhase::kTransitionToFw);  // aligned but slow
  CHECK(step(FlightPhase::kTransitionToFw, fast, tilts_almost, true, false) ==
        FlightPhase::kTransitionToFw);  // fast but one tilt astray
  CHECK(step(FlightPhase::kTransitionToFw, fast, tilts_fwd, true, false) ==
        FlightPhase::kFixedWing);
  CHECK(step(FlightPhase::kFixedWing, fast, tilts_fwd, false, true) ==
        FlightPhase::kTransitionToMc);
  CHECK(step(FlightPhase::kTransitionToMc, fast, tilts_up, false, true) ==
        FlightPhase::kTransitionToMc);  // tilts home but still fast
  CHECK(step(FlightPhase::kTransitionToMc, slow, tilts_up, false, true) ==
        FlightPhase::kMultirotor);
}

TEST_CASE("nominal hover hold stays put") {
  const Rig rig;
  sim::Scenario sc;
  sc.name = "hover_nominal";
  sc.mission = sim::MissionKind::kHoverHold;
  sc.duration = 10.0;
  const sim::SimRunResult r = rig.run(sc);

  CHECK_FALSE(r.summary.crash);
  CHECK(r.summary.altitude_variation <= 0.5);
  CHECK(r.trace.size() == static_cast<size_t>(sc.duration / rig.sp.dt));
  const RigidBodyState& end = r.trace.back().body;
  CHECK((end.position - sc.setpoint.hover_position).norm() < 0.1);
  for (const sim::TraceRecord& rec : r.trace) {
    CHECK(rig.bounds.contains(rec.u_eff, 1e-9));
  }
}

TEST_CASE("nominal cruise hold keeps speed, track and altitude") {
  const Rig rig;
  sim::Scenario sc;
  sc.name = "cruise_nominal";
  sc.mission = sim::MissionKind::kCruiseHold;
  sc.duration = 10.0;
  const sim::SimRunResult r = rig.run(sc);

  CHECK_FALSE(r.summary.crash);
  const sim::TraceRecord& end = r.trace.back();
  CHECK(end.phase == alloc::FlightPhase::kFixedWing);
  CHECK(end.aero.airspeed == Approx(sc.setpoint.cruise_airspeed).epsilon(0.05));
  CHECK(end.body.position.z() == Approx(-sc.setpoint.cruise_altitude).epsilon(0.04));
  CHECK(r.summary.max_cross_track < 1.0);
}

TEST_CASE("identical scenario and seed reproduce the trace bit for bit") {
  const Rig rig;
  const sim::Scenario sc = hover_motor_out(true, 6.0);
  const sim::SimRunResult a = rig.run(sc);
  const sim::SimRunResult b = rig.run(sc);

  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t k = 0; k < a.trace.size(); ++k) {
    const sim::TraceRecord& ra = a.trace[k];
    const sim::TraceRecord& rb = b.trace[k];
    REQUIRE(ra.t == rb.t);
    REQUIRE((ra.body.position - rb.body.position).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((ra.body.velocity - rb.body.velocity).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((ra.u_cmd - rb.u_cmd).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((ra.u_eff - rb.u_eff).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(ra.residual == rb.residual);
  }
}

TEST_CASE("failure clamp dominates every post-injection trace row") {
  const Rig rig;
  for (const bool informed : {true, false}) {
    CAPTURE(informed);
    const sim::SimRunResult r = rig.run(hover_motor_out(informed, 6.0));
    int clamped_rows = 0;
    for (const sim::TraceRecord& rec : r.trace) {
      if (rec.t > 2.0) {
        REQUIRE(rec.u_eff[kRotor1] == 0.0);
        ++clamped_rows;
      }
    }
    // The uninformed run crashes out early; it still must have lived
    // long enough post-injection for the check to mean something.
    CHECK(clamped_rows > (r.summary.crash ? 100 : 500));
  }
}

TEST_CASE("hover trim with a dead rotor balances and keeps the twin spinning") {
  const Rig rig;
  const std::vector<alloc::FailureInfo> failures = {{kRotor1, 0.0}};
  const alloc::TrimPoint trim = alloc::find_hover_trim(rig.p, rig.g, rig.bounds, failures);

  CHECK(trim.residual <= alloc::kTrimTolerance);
  CHECK(trim.u0[kRotor1] == 0.0);
  // The dead rotor's diagonal twin must not idle: at twin-idle the
  // surviving pair's roll/pitch map is singular.
  CHECK(trim.u0[kRotor4] > 100.0);
  CHECK(trim.u0[kRotor2] > 100.0);
  CHECK(trim.u0[kRotor3] > 100.0);
}
