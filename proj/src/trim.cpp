#include "tiltalloc/trim.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>

#include "levmar.hpp"
#include "trim_detail.hpp"

namespace tiltalloc::alloc {

const char* phase_name(FlightPhase phase) {
  switch (phase) {
    case FlightPhase::kMultirotor: return "multirotor";
    case FlightPhase::kTransitionToFw: return "transition_fw";
    case FlightPhase::kFixedWing: return "fixed_wing";
    case FlightPhase::kTransitionToMc: return "transition_mc";
  }
  return "unknown";
}

std::optional<FlightPhase> phase_from_name(const std::string& name) {
  if (name == "multirotor") return FlightPhase::kMultirotor;
  if (name == "transition_fw") return FlightPhase::kTransitionToFw;
  if (name == "fixed_wing") return FlightPhase::kFixedWing;
  if (name == "transition_mc") return FlightPhase::kTransitionToMc;
  return std::nullopt;
}

TrimPoint find_hover_trim(const VehicleParams& p, const RotorGeometry& g,
                          const ActuatorBounds& bounds, const Vec3& position) {
  TrimPoint trim;
  trim.phase = FlightPhase::kMultirotor;
  trim.airspeed = 0.0;
  trim.state = RigidBodyState::level_at(position);

  const double w_hover = std::sqrt(p.weight() / (4.0 * p.thrust_coeff));
  trim.u0.setZero();
  for (int i = kRotor1; i <= kRotor4; ++i) trim.u0[i] = w_hover;

  if (!bounds.contains(trim.u0)) {
    throw TrimNotFound("hover trim outside the actuator box", 1e300);
  }
  Wrench w = model::total_wrench(trim.u0, trim.state, g, p);
  trim.residual = w.vec().cwiseAbs().maxCoeff();
  if (trim.residual > kTrimTolerance) {
    // Asymmetric geometry can unbalance the closed form; that is a
    // configuration problem, not a search problem.
    throw TrimNotFound("hover wrench does not balance for this geometry", trim.residual);
  }
  return trim;
}

namespace {

constexpr double kHalfPi = M_PI / 2.0;

bool channel_failed(const std::vector<FailureInfo>& failures, int channel) {
  for (const FailureInfo& f : failures) {
    if (f.index == channel) return true;
  }
  return false;
}

// Posture score for one balanced hover posture. Three terms, strongest
// first: normalized box margin of the functioning channels capped at ten
// percent of range (rejects postures parked on a limit, e.g. a dead
// rotor's twin at idle); weakest-direction moment authority of the
// bound-scaled Jacobian, capped at a level beyond the controller's
// demands (picks the strongest member of a balanced family); and a
// thrust-economy tie-break so an equally capable plain posture beats a
// needlessly vectored one.
double hover_posture_score(const ActuatorVector& u, const std::vector<int>& free_channels,
                           const ActuatorBounds& bounds, const RigidBodyState& state,
                           const RotorGeometry& g, const VehicleParams& p) {
  double margin = 1e300;
  for (int ch : free_channels) {
    const double range = bounds.upper[ch] - bounds.lower[ch];
    margin = std::min(margin, std::min(u[ch] - bounds.lower[ch], bounds.upper[ch] - u[ch]) / range);
  }

  Eigen::Matrix<double, 3, Eigen::Dynamic> moment_map(3, free_channels.size());
  for (size_t j = 0; j < free_channels.size(); ++j) {
    const int ch = free_channels[j];
    const double h = is_rotor_channel(ch) ? 0.5 : 5e-4;
    ActuatorVector up = u, dn = u;
    up[ch] += h;
    dn[ch] -= h;
    const Vec3 dm = (model::total_wrench(up, state, g, p).moment -
                     model::total_wrench(dn, state, g, p).moment) /
                    (2.0 * h);
    moment_map.col(j) = dm * (bounds.upper[ch] - bounds.lower[ch]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(moment_map);
  const double authority = svd.singularValues().minCoeff();
  constexpr double kEnoughAuthority = 8.0;  // N*m, above any regulator demand

  double thrust_total = 0.0;
  for (int i = kRotor1; i <= kRotor4; ++i) thrust_total += p.thrust_coeff * u[i] * u[i];

  return 100.0 * std::min(margin, 0.10) + 10.0 * std::min(authority / kEnoughAuthority, 1.0) -
         (thrust_total / p.weight() - 1.0);
}

// Start schedule for the cruise search: pitch guess, rotor-speed guess,
// front/rear tilt guesses. Deterministic; tried in order.
struct CruiseStart {
  double theta, w, chi_front, chi_rear;
};

const std::array<CruiseStart, 16>& cruise_starts() {
  static const std::array<CruiseStart, 16> starts = {{
      {0.42, 250.0, kHalfPi, kHalfPi},
      {0.30, 300.0, kHalfPi, kHalfPi},
      {0.50, 220.0, kHalfPi, kHalfPi},
      {0.20, 400.0, kHalfPi, kHalfPi},
      {0.60, 200.0, kHalfPi, kHalfPi},
      {0.10, 500.0, kHalfPi, kHalfPi},
      {0.45, 350.0, kHalfPi, kHalfPi},
      {0.35, 150.0, kHalfPi, kHalfPi},
      {0.42, 250.0, kHalfPi, 1.10},
      {0.30, 350.0, kHalfPi, 1.10},
      {0.50, 250.0, 1.75, 0.90},
      {0.20, 450.0, kHalfPi, 1.30},
      {0.40, 300.0, 1.70, 1.10},
      {0.55, 200.0, kHalfPi, 0.70},
      {0.25, 500.0, 1.60, 1.40},
      {0.45, 400.0, 1.80, 0.80},
  }};
  return starts;
}

}  // namespace

namespace detail {

TrimPoint cruise_trim_pinned(const VehicleParams& p, const RotorGeometry& g,
                             const ActuatorBounds& bounds, double airspeed,
                             const std::vector<std::pair<int, double>>& pins,
                             const Vec3& position) {
  if (airspeed < 1.0) {
    throw TrimNotFound("cruise needs dynamic pressure; airspeed below 1 m/s", 1e300);
  }

  // Unknowns: the twelve actuator channels plus the pitch attitude.
  const int n = kNumActuators + 1;
  const int i_theta = kNumActuators;

  Eigen::VectorXd lower(n), upper(n), fd(n);
  for (int i = 0; i < kNumActuators; ++i) {
    lower[i] = bounds.lower[i];
    upper[i] = bounds.upper[i];
    fd[i] = is_rotor_channel(i) ? 0.5 : 5e-4;
  }
  lower[i_theta] = -0.2;
  upper[i_theta] = 1.2;
  fd[i_theta] = 5e-4;
  for (const auto& [pin, value] : pins) lower[pin] = upper[pin] = value;

  auto make_state = [&](double theta) {
    return RigidBodyState::pitched_level_flight(theta, airspeed, position);
  };

  // Soft preferences select one trim out of the six-dimensional family:
  // tilts forward, surfaces centered, rotors alike.
  const double reg_angle = 1e-3;
  const double reg_rotor = 1e-3 / 1200.0;
  auto residual = [&](const Eigen::VectorXd& x) {
    ActuatorVector u = x.head<12>();
    Wrench w = model::total_wrench(u, make_state(x[i_theta]), g, p);
    Eigen::VectorXd r(6 + 4 + 4 + 3);
    r.head<6>() = w.vec();
    int k = 6;
    for (int i = kTilt1; i <= kTilt4; ++i) r[k++] = reg_angle * (u[i] - kHalfPi);
    for (int i = kAileron1; i <= kRudder; ++i) r[k++] = reg_angle * u[i];
    for (int i = kRotor2; i <= kRotor4; ++i) r[k++] = reg_rotor * (u[i] - u[kRotor1]);
    return r;
  };

  double best_residual = 1e300;
  for (const CruiseStart& start : cruise_starts()) {
    Eigen::VectorXd x0(n);
    for (int i = kRotor1; i <= kRotor4; ++i) x0[i] = start.w;
    x0[kTilt1] = x0[kTilt2] = start.chi_front;
    x0[kTilt3] = x0[kTilt4] = start.chi_rear;
    for (int i = kAileron1; i <= kRudder; ++i) x0[i] = 0.0;
    x0[i_theta] = start.theta;
    for (const auto& [pin, value] : pins) x0[pin] = value;

    tiltalloc::detail::LmProblem prob;
    prob.residual = residual;
    prob.x0 = x0;
    prob.lower = lower;
    prob.upper = upper;
    prob.fd_step = fd;
    prob.n_primary = 6;
    prob.primary_tol = 1e-8;
    prob.max_iterations = 200;

    tiltalloc::detail::LmResult lm = tiltalloc::detail::solve_levmar(prob);
    best_residual = std::min(best_residual, lm.primary_norm_inf);

    // The solver aims two decades below the trim tolerance; an endpoint
    // that fell short of that internal goal can still be a valid trim.
    TrimPoint trim;
    trim.phase = FlightPhase::kFixedWing;
    trim.airspeed = airspeed;
    trim.state = make_state(lm.x[i_theta]);
    trim.u0 = lm.x.head<12>();
    trim.residual = model::total_wrench(trim.u0, trim.state, g, p).vec().cwiseAbs().maxCoeff();
    // Box check against the pin-collapsed bounds: pinned channels are
    // allowed to sit outside a caller-shrunk box.
    bool inside = true;
    for (int i = 0; i < kNumActuators; ++i) {
      if (trim.u0[i] < lower[i] - 1e-12 || trim.u0[i] > upper[i] + 1e-12) inside = false;
    }
    if (trim.residual <= kTrimTolerance && inside) {
      return trim;
    }
  }
  throw TrimNotFound("no cruise trim reached the residual tolerance", best_residual);
}

}  // namespace detail

TrimPoint find_hover_trim(const VehicleParams& p, const RotorGeometry& g,
                          const ActuatorBounds& bounds, const std::vector<FailureInfo>& failures,
                          const Vec3& position) {
  if (failures.empty()) return find_hover_trim(p, g, bounds, position);
  for (const FailureInfo& f : failures) {
    if (f.index < 0 || f.index >= kNumActuators) {
      throw TrimNotFound("failure index out of range", 1e300);
    }
    if (f.value < bounds.lower[f.index] - 1e-12 || f.value > bounds.upper[f.index] + 1e-12) {
      throw TrimNotFound("lock value outside the actuator box", 1e300);
    }
  }

  const RigidBodyState state = RigidBodyState::level_at(position);

  // Failed channels pinned, surfaces centered (no airflow, no wrench);
  // the balance is searched over the functioning rotors and tilts.
  ActuatorVector base = ActuatorVector::Zero();
  for (const FailureInfo& f : failures) base[f.index] = f.value;

  std::vector<int> free_channels, dead_rotors;
  int n_live = 0;
  for (int i = kRotor1; i <= kRotor4; ++i) {
    if (channel_failed(failures, i)) {
      dead_rotors.push_back(i);
    } else {
      free_channels.push_back(i);
      ++n_live;
    }
  }
  for (int i = kTilt1; i <= kTilt4; ++i) {
    if (!channel_failed(failures, i)) free_channels.push_back(i);
  }
  const int nv = static_cast<int>(free_channels.size());
  if (n_live == 0) throw TrimNotFound("no functioning rotor; hover has no thrust", 1e300);

  Eigen::VectorXd lo(nv), hi(nv), fd(nv);
  for (int j = 0; j < nv; ++j) {
    lo[j] = bounds.lower[free_channels[j]];
    hi[j] = bounds.upper[free_channels[j]];
    fd[j] = is_rotor_channel(free_channels[j]) ? 0.5 : 5e-4;
  }

  auto assemble = [&](const Eigen::VectorXd& x) {
    ActuatorVector u = base;
    for (int j = 0; j < nv; ++j) u[free_channels[j]] = x[j];
    return u;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    return model::total_wrench(assemble(x), state, g, p).vec().eval();
  };

  // Even thrust share across the survivors, clamped into the box.
  const double w_even = std::clamp(std::sqrt(p.weight() / (n_live * p.thrust_coeff)),
                                   bounds.lower[kRotor1], bounds.upper[kRotor1]);

  // One start = an initial point plus an optional channel held fixed for
  // that attempt only (the hold steers the solver onto a family branch;
  // the held channel is still scored as free afterwards).
  struct HoverStart {
    Eigen::VectorXd x0;
    int hold_var = -1;
  };
  std::vector<HoverStart> starts;

  static constexpr double kTiltPatterns[8][4] = {
      {0.0, 0.0, 0.0, 0.0},     {0.2, -0.2, -0.2, 0.2},   {-0.2, 0.2, 0.2, -0.2},
      {0.3, 0.3, -0.3, -0.3},   {-0.3, -0.3, 0.3, 0.3},   {0.15, -0.15, 0.3, -0.3},
      {0.5, -0.5, -0.5, 0.5},   {-0.1, 0.1, -0.4, 0.4},
  };
  for (double scale : {1.0, 1.2}) {
    for (const auto& pattern : kTiltPatterns) {
      Eigen::VectorXd x0(nv);
      for (int j = 0; j < nv; ++j) {
        const int ch = free_channels[j];
        x0[j] = is_rotor_channel(ch) ? std::min(scale * w_even, hi[j])
                                     : std::clamp(pattern[ch - kTilt1], lo[j], hi[j]);
      }
      starts.push_back({x0, -1});
    }
  }

  // A dead rotor drags its diagonal twin toward idle (the remaining pair
  // alone has a singular roll/pitch map), yet a branch of balanced
  // postures with the twin spinning exists - reached by re-vectoring the
  // twin past vertical. Holding the twin's speed at several levels lands
  // the solver on distinct members of that branch; scoring then picks
  // the strongest.
  for (int dead : dead_rotors) {
    const int twin = kRotor1 + (3 - (dead - kRotor1));
    if (channel_failed(failures, twin)) continue;
    int twin_var = -1, twin_tilt_var = -1;
    for (int j = 0; j < nv; ++j) {
      if (free_channels[j] == twin) twin_var = j;
      if (free_channels[j] == kTilt1 + (twin - kRotor1)) twin_tilt_var = j;
    }
    if (twin_var < 0) continue;
    for (double w_twin : {250.0, 450.0, 650.0}) {
      for (double chi_twin : {kHalfPi + 0.13, -kHalfPi + 0.13}) {
        Eigen::VectorXd x0(nv);
        for (int j = 0; j < nv; ++j) {
          const int ch = free_channels[j];
          x0[j] = is_rotor_channel(ch) ? w_even : 0.0;
        }
        x0[twin_var] = std::clamp(w_twin, lo[twin_var], hi[twin_var]);
        if (twin_tilt_var >= 0) {
          x0[twin_tilt_var] = std::clamp(chi_twin, lo[twin_tilt_var], hi[twin_tilt_var]);
        }
        starts.push_back({x0, twin_var});
      }
    }
  }

  TrimPoint best;
  double best_score = -1e300;
  double best_residual = 1e300;
  for (const HoverStart& start : starts) {
    tiltalloc::detail::LmProblem prob;
    prob.residual = residual;
    prob.x0 = start.x0;
    prob.lower = lo;
    prob.upper = hi;
    if (start.hold_var >= 0) {
      prob.lower[start.hold_var] = prob.upper[start.hold_var] = start.x0[start.hold_var];
    }
    prob.fd_step = fd;
    prob.n_primary = 6;
    prob.primary_tol = 1e-9;
    prob.max_iterations = 300;
    tiltalloc::detail::LmResult lm = tiltalloc::detail::solve_levmar(prob);

    const ActuatorVector u = assemble(lm.x);
    const double res = model::total_wrench(u, state, g, p).vec().cwiseAbs().maxCoeff();
    best_residual = std::min(best_residual, res);
    if (res > kTrimTolerance) continue;
    const double score = hover_posture_score(u, free_channels, bounds, state, g, p);
    if (score > best_score) {
      best_score = score;
      best.state = state;
      best.u0 = u;
      best.residual = res;
      best.phase = FlightPhase::kMultirotor;
      best.airspeed = 0.0;
    }
  }
  if (best_score == -1e300) {
    throw TrimNotFound("no balanced hover posture with these failures", best_residual);
  }
  // A stopped rotor's tilt has exactly zero effect; park it at the
  // nominal upright so the pull regularizes it there.
  for (int dead : dead_rotors) {
    if (std::abs(best.u0[dead]) < 1.0 && !channel_failed(failures, kTilt1 + (dead - kRotor1))) {
      best.u0[kTilt1 + (dead - kRotor1)] = 0.0;
    }
  }
  return best;
}

TrimPoint find_cruise_trim(const VehicleParams& p, const RotorGeometry& g,
                           const ActuatorBounds& bounds, double airspeed, int locked,
                           double locked_value, const Vec3& position) {
  std::vector<std::pair<int, double>> pins;
  if (locked >= 0) {
    if (locked_value < bounds.lower[locked] || locked_value > bounds.upper[locked]) {
      throw TrimNotFound("locked value outside the actuator box", 1e300);
    }
    pins.emplace_back(locked, locked_value);
  }
  return detail::cruise_trim_pinned(p, g, bounds, airspeed, pins, position);
}

TrimPoint find_cruise_trim(const VehicleParams& p, const RotorGeometry& g,
                           const ActuatorBounds& bounds, double airspeed,
                           const std::vector<FailureInfo>& failures, const Vec3& position) {
  std::vector<std::pair<int, double>> pins;
  for (const FailureInfo& f : failures) {
    if (f.index < 0 || f.index >= kNumActuators) {
      throw TrimNotFound("failure index out of range", 1e300);
    }
    if (f.value < bounds.lower[f.index] || f.value > bounds.upper[f.index]) {
      throw TrimNotFound("lock value outside the actuator box", 1e300);
    }
    pins.emplace_back(f.index, f.value);
  }
  return detail::cruise_trim_pinned(p, g, bounds, airspeed, pins, position);
}

}  // namespace tiltalloc::alloc
