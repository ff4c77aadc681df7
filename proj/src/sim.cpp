#include "tiltalloc/sim.hpp"

#include <algorithm>
#include <cmath>


namespace tiltalloc::sim {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

struct StateDeriv {
  Vec3 dp, dv, dw;
  Eigen::Vector4d dq;
};

StateDeriv derivative(const RigidBodyState& x, const ActuatorVector& u_eff,
                      const VehicleParams& p, const RotorGeometry& g, const Mat3& inertia,
                      const Mat3& inertia_inv) {
  const Wrench w = model::total_wrench(u_eff, x, g, p);
  StateDeriv d;
  d.dp = x.velocity;
  d.dv = (x.attitude * w.force) / p.mass;
  // qdot = 1/2 q (x) [0, w_body]
  const Quat omega(0.0, x.angular_rate.x(), x.angular_rate.y(), x.angular_rate.z());
  d.dq = 0.5 * (x.attitude * omega).coeffs();
  d.dw = inertia_inv * (w.moment - x.angular_rate.cross(inertia * x.angular_rate));
  return d;
}

RigidBodyState advance(const RigidBodyState& x, const StateDeriv& d, double h) {
  RigidBodyState y = x;
  y.position += h * d.dp;
  y.velocity += h * d.dv;
  y.attitude.coeffs() += h * d.dq;
  y.attitude.normalize();  // stage states must stay on the unit sphere
  y.angular_rate += h * d.dw;
  return y;
}

}  // namespace

const char* mission_name(MissionKind m) {
  switch (m) {
    case MissionKind::kHoverHold: return "hover_hold";
    case MissionKind::kCruiseHold: return "cruise_hold";
    case MissionKind::kFullMission: return "full_mission";
  }
  return "unknown";
}

RigidBodyState step_dynamics(const RigidBodyState& s, const ActuatorVector& u_eff, double dt,
                             const VehicleParams& p, const RotorGeometry& g,
                             const Mat3& inertia) {
  const Mat3 inertia_inv = inertia.inverse();
  const StateDeriv k1 = derivative(s, u_eff, p, g, inertia, inertia_inv);
  const StateDeriv k2 = derivative(advance(s, k1, 0.5 * dt), u_eff, p, g, inertia, inertia_inv);
  const StateDeriv k3 = derivative(advance(s, k2, 0.5 * dt), u_eff, p, g, inertia, inertia_inv);
  const StateDeriv k4 = derivative(advance(s, k3, dt), u_eff, p, g, inertia, inertia_inv);

  RigidBodyState out = s;
  const double h = dt / 6.0;
  out.position += h * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  out.velocity += h * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.attitude.coeffs() += h * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  out.attitude.normalize();
  out.angular_rate += h * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
  return out;
}

ActuatorVector apply_actuator_dynamics(const ActuatorVector& u_eff, const ActuatorVector& u_cmd,
                                       double dt, const SimParams& sp,
                                       const std::vector<FailureSpec>& failures, double t) {
  ActuatorVector out;
  for (int i = 0; i < kNumActuators; ++i) {
    const double tau = is_rotor_channel(i)   ? sp.rotor_lag
                       : is_tilt_channel(i)  ? sp.tilt_lag
                                             : sp.surface_lag;
    const double alpha = 1.0 - std::exp(-dt / tau);
    out[i] = u_eff[i] + alpha * (u_cmd[i] - u_eff[i]);
  }
  for (const FailureSpec& f : failures) {
    if (t >= f.time) out[f.index] = f.value;
  }
  return out;
}

FlightPhase phase_machine(FlightPhase current, const AeroState& aero, const Vec12& u_eff,
                          bool fw_commanded, bool mc_commanded, const SimParams& sp) {
  auto tilts_near = [&](double endpoint) {
    for (int i = kTilt1; i <= kTilt4; ++i) {
      if (std::abs(u_eff[i] - endpoint) > sp.tilt_align_tol) return false;
    }
    return true;
  };
  switch (current) {
    case FlightPhase::kMultirotor:
      return fw_commanded ? FlightPhase::kTransitionToFw : current;
    case FlightPhase::kTransitionToFw:
      if (aero.airspeed >= sp.v_transition && tilts_near(kHalfPi)) return FlightPhase::kFixedWing;
      return current;
    case FlightPhase::kFixedWing:
      return mc_commanded ? FlightPhase::kTransitionToMc : current;
    case FlightPhase::kTransitionToMc:
      if (aero.airspeed <= sp.v_transition && tilts_near(0.0)) return FlightPhase::kMultirotor;
      return current;
  }
  return current;
}

SimRunResult run_scenario(const Scenario& scenario, const VehicleParams& p,
                          const RotorGeometry& g, const ActuatorBounds& bounds,
                          const alloc::AllocatorSettings& alloc_settings,
                          const ControllerGains& gains, const SimParams& sim_params) {
  using alloc::FlightPhase;
  SimRunResult out;
  out.summary.name = scenario.name;

  const Mat3 inertia = sim_params.inertia_diag.asDiagonal();
  alloc::TrimPoint hover_trim =
      alloc::find_hover_trim(p, g, bounds, scenario.setpoint.hover_position);
  alloc::TrimPoint cruise_trim;
  const bool needs_cruise = scenario.mission != MissionKind::kHoverHold;
  if (needs_cruise) {
    cruise_trim = alloc::find_cruise_trim(p, g, bounds, scenario.setpoint.cruise_airspeed);
  }

  // Initial condition per mission.
  RigidBodyState state;
  FlightPhase phase;
  ActuatorVector u_start;
  if (scenario.mission == MissionKind::kCruiseHold) {
    phase = FlightPhase::kFixedWing;
    u_start = cruise_trim.u0;
    const Quat yaw_rot(Eigen::AngleAxisd(scenario.setpoint.cruise_heading, Vec3::UnitZ()));
    state = cruise_trim.state;
    state.position = Vec3(0.0, scenario.setpoint.track_offset_y, -scenario.setpoint.cruise_altitude);
    state.attitude = yaw_rot * state.attitude;
    state.velocity = yaw_rot * state.velocity;
  } else {
    phase = FlightPhase::kMultirotor;
    u_start = hover_trim.u0;
    state = hover_trim.state;
  }

  Controller ctrl(gains, p, inertia);
  if (needs_cruise) ctrl.set_cruise_reference(cruise_trim.state.pitch());

  // The allocator linearization. Informed failures relinearize with the
  // failed channels pinned; a run containing any uninformed failure keeps
  // the nominal trim allocation frozen for its whole duration - that is
  // exactly what "not told" means for a linear allocator.
  const bool frozen = std::any_of(scenario.failures.begin(), scenario.failures.end(),
                                  [](const FailureSpec& f) { return !f.informed; });

  std::vector<alloc::FailureInfo> known_failures;
  alloc::AllocationModel model;
  ActuatorVector u_cmd = u_start;
  ActuatorVector u_eff = u_start;
  int steps_since_relin = 0;
  // Post-adaptation migration window: relinearize every step while the
  // posture walks to a re-anchored trim (a few tilt time constants).
  constexpr double kAdaptWindow = 2.0;  // s
  double relin_every_step_until = -1.0;
  // Feedforward posture migration. A failed-configuration equilibrium can
  // sit far from the current posture (a dead rotor's balance tilts its
  // diagonal twin past vertical), and no exact-wrench step will walk
  // there: at the old geometry the exact solve is the twin-at-idle corner
  // where the surviving pair's roll/pitch map goes singular. So the
  // linearization baseline itself slews to the new anchor at actuator-
  // scale rates, and the controller absorbs the bounded imbalance of the
  // posture in transit.
  constexpr double kRotorSlew = 1200.0;      // rad/s per s of baseline motion
  constexpr double kAngleSlew = 2.5;         // rad/s
  constexpr double kMigrationFloor = 250.0;  // rad/s, survivors keep spinning
  bool migrating = false;
  ActuatorVector u_base = u_start;

  auto pull_trim = [&](const AeroState& aero) {
    switch (phase) {
      case FlightPhase::kMultirotor:
        return hover_trim;
      case FlightPhase::kFixedWing:
        return cruise_trim;
      default: {
        // Transition pull: hover thrust levels with the tilts scheduled
        // against airspeed, so the null space walks the rotors over.
        alloc::TrimPoint t = hover_trim;
        const double frac = std::clamp(aero.airspeed / sim_params.v_transition, 0.0, 1.0);
        for (int i = kTilt1; i <= kTilt4; ++i) t.u0[i] = kHalfPi * frac;
        return t;
      }
    }
  };
  auto rebuild = [&](const AeroState& aero) {
    ActuatorVector u0 = migrating ? u_base : u_cmd;
    for (const alloc::FailureInfo& f : known_failures) u0[f.index] = f.value;
    const bool rotor_squared = phase == FlightPhase::kMultirotor;
    ActuatorBounds box = bounds;
    if (migrating && rotor_squared) {
      // While the tilts are still in transit the exact hover solve wants
      // the dead rotor's twin at idle. Floor the surviving rotors so the
      // allocator trades a bounded moment error instead of entering that
      // singular corner before the new geometry arrives.
      const ActuatorVector target = pull_trim(aero).u0;
      for (int i = kRotor1; i <= kRotor4; ++i) {
        const bool pinned =
            std::any_of(known_failures.begin(), known_failures.end(),
                        [i](const alloc::FailureInfo& f) { return f.index == i; });
        if (!pinned) {
          box.lower[i] = std::max(box.lower[i], std::min(kMigrationFloor, 0.8 * target[i]));
        }
      }
    }
    model = alloc::build_allocation_model(p, g, pull_trim(aero), state, u0, rotor_squared,
                                          known_failures, alloc_settings, box);
    steps_since_relin = 0;
  };

  const int n_steps = static_cast<int>(std::ceil(scenario.duration / sim_params.dt));
  std::vector<bool> injected(scenario.failures.size(), false);
  bool prev_saturated = false;
  out.trace.reserve(n_steps);

  for (int k = 0; k < n_steps; ++k) {
    const double t = k * sim_params.dt;

    bool failures_changed = false;
    for (size_t i = 0; i < scenario.failures.size(); ++i) {
      const FailureSpec& f = scenario.failures[i];
      if (!injected[i] && t >= f.time) {
        injected[i] = true;
        if (f.informed) {
          known_failures.push_back({f.index, f.value});
          failures_changed = true;
        }
      }
    }

    const AeroState aero = model::aero_angles(state.body_velocity(), p);
    const bool fw_cmd = scenario.mission == MissionKind::kFullMission &&
                        t >= scenario.transition_fw_time;
    const bool mc_cmd = scenario.mission == MissionKind::kFullMission &&
                        t >= scenario.transition_mc_time;
    const FlightPhase new_phase = phase_machine(phase, aero, u_eff, fw_cmd, mc_cmd, sim_params);
    const bool phase_changed = new_phase != phase;
    phase = new_phase;

    const Wrench w_des = ctrl.update(state, scenario.setpoint, phase, sim_params.dt);

    const bool transition =
        phase == FlightPhase::kTransitionToFw || phase == FlightPhase::kTransitionToMc;
    const int cadence = transition ? alloc_settings.relinearize_transition
                                   : alloc_settings.relinearize_steady;
    // An announced failure re-anchors the trim pull: the nominal posture
    // may have no moment envelope left (a dead front rotor drags its
    // diagonal twin to idle, where the remaining pair's roll/pitch map is
    // singular), so the pull target becomes the failed-configuration
    // equilibrium. The command is left continuous - the null space walks
    // the posture over while the equality layer keeps serving the
    // controller - and the model relinearizes every step until the
    // migration settles.
    if (failures_changed && !frozen) {
      try {
        hover_trim = alloc::find_hover_trim(p, g, bounds, known_failures,
                                            scenario.setpoint.hover_position);
      } catch (const alloc::TrimNotFound&) {
        // No balanced posture left; keep the old anchor and let the
        // allocator fight with what remains.
      }
      if (needs_cruise) {
        try {
          cruise_trim = alloc::find_cruise_trim(p, g, bounds, scenario.setpoint.cruise_airspeed,
                                                known_failures);
          ctrl.set_cruise_reference(cruise_trim.state.pitch());
        } catch (const alloc::TrimNotFound&) {
        }
      }
      relin_every_step_until = t + kAdaptWindow;
      u_base = u_eff;
      for (const alloc::FailureInfo& f : known_failures) u_base[f.index] = f.value;
      migrating = true;
    }
    if (migrating) {
      if (t >= relin_every_step_until) {
        migrating = false;
      } else {
        const ActuatorVector target = pull_trim(aero).u0;
        for (int i = 0; i < kNumActuators; ++i) {
          const double rate = is_rotor_channel(i) ? kRotorSlew : kAngleSlew;
          u_base[i] += std::clamp(target[i] - u_base[i], -rate * sim_params.dt,
                                  rate * sim_params.dt);
        }
        for (const alloc::FailureInfo& f : known_failures) u_base[f.index] = f.value;
      }
    }

    // Saturation means the box turned the last solve into a compromise;
    // relinearizing at the commanded point walks the model toward the
    // posture where the request becomes reachable again.
    if (k == 0) {
      rebuild(aero);
    } else if (!frozen && (failures_changed || phase_changed || prev_saturated ||
                           t < relin_every_step_until || ++steps_since_relin >= cadence)) {
      rebuild(aero);
    }

    const Wrench w_at_u0 = model::total_wrench(model.u0, state, g, p);
    alloc::AllocationRequest request;
    request.wrench = w_des.vec() - w_at_u0.vec();
    const alloc::AllocationResult res = alloc::allocate(model, request);
    u_cmd = res.u_setpoint;
    prev_saturated = res.saturated;

    TraceRecord rec;
    rec.t = t;
    rec.body = state;
    rec.aero = aero;
    rec.phase = phase;
    rec.u_cmd = u_cmd;
    rec.u_eff = u_eff;
    rec.w_desired = w_des.vec();
    rec.w_achieved = model::total_wrench(u_cmd, state, g, p).vec();
    rec.objective = res.objective;
    rec.residual = res.residual;
    rec.saturated = res.saturated ? 1 : 0;
    out.trace.push_back(rec);

    u_eff = apply_actuator_dynamics(u_eff, u_cmd, sim_params.dt, sim_params, scenario.failures, t);
    state = step_dynamics(state, u_eff, sim_params.dt, p, g, inertia);

    const double roll = state.roll(), pitch = state.pitch();
    if (std::abs(roll) > sim_params.crash_attitude || std::abs(pitch) > sim_params.crash_attitude ||
        state.position.z() >= 0.0) {
      out.summary.crash = true;
      out.summary.crash_time = t + sim_params.dt;
      break;
    }
  }

  // ---- summary metrics ----
  RunSummary& sum = out.summary;
  double t_inj = -1.0;
  for (const FailureSpec& f : scenario.failures) {
    t_inj = t_inj < 0.0 ? f.time : std::min(t_inj, f.time);
  }
  const double t_ref = t_inj >= 0.0 ? t_inj : 0.0;

  // Attitude reference: the last sample before injection (or the start).
  double ref_roll = out.trace.empty() ? 0.0 : out.trace.front().body.roll();
  double ref_pitch = out.trace.empty() ? 0.0 : out.trace.front().body.pitch();
  for (const TraceRecord& r : out.trace) {
    if (r.t < t_ref) {
      ref_roll = r.body.roll();
      ref_pitch = r.body.pitch();
    }
  }

  double alt_min = 1e300, alt_max = -1e300;
  const double cpsi = std::cos(scenario.setpoint.cruise_heading);
  const double spsi = std::sin(scenario.setpoint.cruise_heading);
  for (const TraceRecord& r : out.trace) {
    sum.saturation_count += r.saturated;
    if (r.t < t_ref) continue;
    const double droll = std::abs(wrap_angle(r.body.roll() - ref_roll));
    const double dpitch = std::abs(wrap_angle(r.body.pitch() - ref_pitch));
    sum.max_attitude_dev = std::max(sum.max_attitude_dev, std::max(droll, dpitch) * 180.0 / M_PI);
    const double alt = -r.body.position.z();
    alt_min = std::min(alt_min, alt);
    alt_max = std::max(alt_max, alt);
    if (scenario.mission != MissionKind::kHoverHold) {
      const double rel_x = r.body.position.x();
      const double rel_y = r.body.position.y() - scenario.setpoint.track_offset_y;
      sum.max_cross_track = std::max(sum.max_cross_track, std::abs(rel_x * spsi - rel_y * cpsi));
      const double hdev = std::abs(wrap_angle(r.body.yaw() - scenario.setpoint.cruise_heading));
      sum.max_heading_dev = std::max(sum.max_heading_dev, hdev * 180.0 / M_PI);
    }
  }
  if (alt_max >= alt_min) sum.altitude_variation = alt_max - alt_min;

  // Actuator convergence: all functioning channels quieter than the rate
  // floor for the hold window, measured from injection (or the start).
  auto failed_at_end = [&](int ch) {
    for (const FailureSpec& f : scenario.failures) {
      if (f.index == ch) return true;
    }
    return false;
  };
  const double quiet_needed = sim_params.converge_hold;
  double quiet_start = -1.0;
  for (size_t i = 1; i < out.trace.size(); ++i) {
    const TraceRecord& r = out.trace[i];
    if (r.t < t_ref) continue;
    bool quiet = true;
    for (int ch = 0; ch < kNumActuators && quiet; ++ch) {
      if (failed_at_end(ch)) continue;
      const double rate = std::abs(r.u_eff[ch] - out.trace[i - 1].u_eff[ch]) / sim_params.dt;
      if (rate > sim_params.converge_rate_frac * bounds.range(ch)) quiet = false;
    }
    if (!quiet) {
      quiet_start = -1.0;
    } else if (quiet_start < 0.0) {
      quiet_start = r.t;
    } else if (r.t - quiet_start >= quiet_needed) {
      sum.time_to_converge = quiet_start - t_ref;
      break;
    }
  }

  // Mean tilt posture over the last five seconds of flight.
  if (!out.trace.empty()) {
    const double t_tail = out.trace.back().t - 5.0;
    int n = 0;
    double front = 0.0, rear = 0.0;
    for (const TraceRecord& r : out.trace) {
      if (r.t < t_tail) continue;
      front += 0.5 * (r.u_eff[kTilt1] + r.u_eff[kTilt2]);
      rear += 0.5 * (r.u_eff[kTilt3] + r.u_eff[kTilt4]);
      ++n;
    }
    if (n > 0) {
      sum.mean_front_tilt = front / n;
      sum.mean_rear_tilt = rear / n;
    }
  }
  return out;
}

}  // namespace tiltalloc::sim
