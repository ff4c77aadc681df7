#include "tiltalloc/wrench_space.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "levmar.hpp"
#include "trim_detail.hpp"

namespace tiltalloc::wrench_space {

namespace {

bool is_failed(const std::vector<FailureInfo>& failures, int channel) {
  for (const FailureInfo& f : failures) {
    if (f.index == channel) return true;
  }
  return false;
}

/// 53-bit uniform in [0, 1); pinned to the generator's bit stream so the
/// cloud is reproducible across standard libraries.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

/// Box shrunk by the interior margin on functioning channels; failed
/// channels keep their full rows (they are pinned anyway).
ActuatorBounds interior_box(const ActuatorBounds& bounds, const std::vector<FailureInfo>& failures) {
  ActuatorBounds shrunk = bounds;
  for (int i = 0; i < kNumActuators; ++i) {
    if (is_failed(failures, i)) continue;
    const double margin = kInteriorMargin * bounds.range(i);
    shrunk.lower[i] += margin;
    shrunk.upper[i] -= margin;
  }
  return shrunk;
}

/// Base input for still-air questions: tilts up, surfaces centered,
/// failures at their lock values, functioning rotors stopped.
ActuatorVector hover_template(const std::vector<FailureInfo>& failures) {
  ActuatorVector u = ActuatorVector::Zero();
  for (const FailureInfo& f : failures) u[f.index] = f.value;
  return u;
}

struct LinearThrustMap {
  // controlled wrench = [g_moment; g_force] * t_free + [m0; f0], exact in
  // still air where thrust is the only control effect.
  Eigen::MatrixXd g_moment;  // 3 x n_free
  Eigen::MatrixXd g_force;   // 3 x n_free
  Vec3 m0, f0;
  std::vector<int> free_rotors;
};

LinearThrustMap build_thrust_map(const VehicleParams& p, const RotorGeometry& g,
                                 const ActuatorVector& base,
                                 const std::vector<FailureInfo>& failures) {
  LinearThrustMap map;
  for (int i = 0; i < 4; ++i) {
    if (!is_failed(failures, kRotor1 + i)) map.free_rotors.push_back(i);
  }
  const int nf = static_cast<int>(map.free_rotors.size());
  map.g_moment.resize(3, nf);
  map.g_force.resize(3, nf);
  for (int j = 0; j < nf; ++j) {
    const int i = map.free_rotors[j];
    const Vec3 axis = model::tilt_axis(base[kTilt1 + i]);
    map.g_force.col(j) = p.thrust_coeff * axis;
    map.g_moment.col(j) =
        p.thrust_coeff * g.position[i].cross(axis) + g.spin_dir[i] * p.torque_coeff * axis;
  }

  ActuatorVector rest = base;
  for (int j = 0; j < nf; ++j) rest[kRotor1 + map.free_rotors[j]] = 0.0;
  const Wrench w0 = model::controlled_wrench(rest, RigidBodyState::level_at(Vec3(0, 0, -20)), g, p);
  map.m0 = w0.moment;
  map.f0 = w0.force;
  return map;
}

/// Vertices of {s : lo <= base + N s <= hi} for a small-dimensional s.
/// Exact: every vertex activates dim(s) independent box rows; all row
/// subsets are enumerated. Returns an empty list when the polytope has no
/// vertex (empty set, for a compact polytope).
std::vector<Eigen::VectorXd> box_polytope_vertices(const Eigen::MatrixXd& n,
                                                   const Eigen::VectorXd& base,
                                                   const Eigen::VectorXd& lo,
                                                   const Eigen::VectorXd& hi) {
  const int d = static_cast<int>(n.cols());
  const int m = static_cast<int>(n.rows());
  std::vector<Eigen::VectorXd> vertices;

  auto feasible = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd t = base + n * s;
    for (int i = 0; i < m; ++i) {
      if (t[i] < lo[i] - 1e-9 || t[i] > hi[i] + 1e-9) return false;
    }
    return true;
  };

  if (d == 0) {
    Eigen::VectorXd s(0);
    if (feasible(s)) vertices.push_back(s);
    return vertices;
  }

  // Active-row combinations; each row can bind at its lower or upper face.
  std::vector<int> pick(d, 0);
  auto try_combo = [&](const std::vector<int>& rows_idx) {
    for (int mask = 0; mask < (1 << d); ++mask) {
      Eigen::MatrixXd a(d, d);
      Eigen::VectorXd b(d);
      for (int k = 0; k < d; ++k) {
        const int i = rows_idx[k];
        a.row(k) = n.row(i);
        b[k] = ((mask >> k) & 1 ? hi[i] : lo[i]) - base[i];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd s = lu.solve(b);
      if (feasible(s)) vertices.push_back(s);
    }
  };
  // Enumerate d-subsets of rows.
  std::vector<int> rows_idx(d);
  auto recurse = [&](auto&& self, int start, int depth) -> void {
    if (depth == d) {
      try_combo(rows_idx);
      return;
    }
    for (int i = start; i < m; ++i) {
      rows_idx[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  recurse(recurse, 0, 0);
  return vertices;
}

}  // namespace

WrenchSetSample sample_wrench_set(const SamplingConfig& config,
                                  const std::vector<FailureInfo>& failures, int n_samples,
                                  std::uint64_t rng_seed) {
  WrenchSetSample sample;
  sample.configuration = config.configuration;
  sample.failures = failures;
  sample.seed = rng_seed;
  sample.points.reserve(n_samples);
  sample.inputs.reserve(n_samples);

  RigidBodyState state;
  ActuatorVector base = ActuatorVector::Zero();
  if (config.configuration == Configuration::kMultirotor) {
    state = RigidBodyState::level_at(Vec3(0, 0, -20));
  } else {
    const alloc::TrimPoint trim = alloc::find_cruise_trim(config.params, config.geometry,
                                                          config.bounds, config.cruise_airspeed);
    state = trim.state;
  }

  std::mt19937_64 rng(rng_seed);
  for (int k = 0; k < n_samples; ++k) {
    ActuatorVector u = base;
    for (int i = 0; i < kNumActuators; ++i) {
      const bool sampled =
          config.configuration == Configuration::kFixedWing || is_rotor_channel(i);
      if (!sampled) continue;
      u[i] = config.bounds.lower[i] + config.bounds.range(i) * uniform01(rng);
    }
    for (const FailureInfo& f : failures) u[f.index] = f.value;
    sample.inputs.push_back(u);
    sample.points.push_back(model::controlled_wrench(u, state, config.geometry, config.params).vec());
  }
  return sample;
}

void export_wrench_cloud(const std::string& path, const WrenchSetSample& sample) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "Mx,My,Mz,Fx,Fy,Fz\n";
  char buf[32];
  for (const Vec6& w : sample.points) {
    for (int i = 0; i < 6; ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", w[i]);
      out << buf << (i == 5 ? '\n' : ',');
    }
  }
}

HoverFeasibility static_hover_check(const SamplingConfig& config,
                                    const std::vector<FailureInfo>& failures, bool allow_tilt) {
  const VehicleParams& p = config.params;
  const RotorGeometry& g = config.geometry;
  HoverFeasibility result;

  const ActuatorVector base = hover_template(failures);
  const ActuatorBounds shrunk = interior_box(config.bounds, failures);
  const LinearThrustMap map = build_thrust_map(p, g, base, failures);
  const int nf = static_cast<int>(map.free_rotors.size());

  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.g_force);
    const auto& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > 1e-8 * sv[0]) ++result.rank_force_map;
    }
  }

  if (!allow_tilt) {
    // The wrench is affine in t = w^2: solve the moment balance exactly,
    // then maximize thrust over the solution family inside the interior
    // box. ||f|| is convex, so the maximum sits on a vertex.
    Eigen::VectorXd t_lo(nf), t_hi(nf);
    for (int j = 0; j < nf; ++j) {
      const int ch = kRotor1 + map.free_rotors[j];
      t_lo[j] = shrunk.lower[ch] * shrunk.lower[ch];
      t_hi[j] = shrunk.upper[ch] * shrunk.upper[ch];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.g_moment,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] > 1e-12 * sv[0]) ++rank;
    }
    Eigen::VectorXd t_p = Eigen::VectorXd::Zero(nf);
    const Vec3 b = -map.m0;
    for (int i = 0; i < rank; ++i) {
      t_p += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sv[i]);
    }
    if ((map.g_moment * t_p - b).norm() > 1e-9 * (1.0 + b.norm())) {
      result.diagnostic = "no thrust profile balances the residual moment";
      result.moment_residual = (map.g_moment * t_p - b).norm();
      return result;
    }
    const Eigen::MatrixXd null = svd.matrixV().rightCols(nf - rank);

    const auto vertices = box_polytope_vertices(null, t_p, t_lo, t_hi);
    if (vertices.empty()) {
      result.diagnostic = "moment-balancing thrust family misses the actuator box";
      return result;
    }
    double best_thrust = -1.0;
    Eigen::VectorXd best_t;
    for (const Eigen::VectorXd& s : vertices) {
      Eigen::VectorXd t = t_p + null * s;
      const double thrust = (map.f0 + map.g_force * t).norm();
      if (thrust > best_thrust) {
        best_thrust = thrust;
        best_t = t;
      }
    }
    result.thrust_margin = best_thrust - p.weight();
    ActuatorVector u = base;
    for (int j = 0; j < nf; ++j) {
      u[kRotor1 + map.free_rotors[j]] = std::sqrt(std::max(best_t[j], 0.0));
    }
    result.witness = u;
    result.moment_residual = (map.g_moment * best_t + map.m0).norm();
    result.feasible = result.thrust_margin >= 0.0 && result.moment_residual <= 1e-6;
    result.diagnostic = result.feasible
                            ? "exact thrust-family maximum"
                            : "peak balanced thrust is below the vehicle weight";
    return result;
  }

  // Tilts free: search functioning rotor speeds and tilt angles for zero
  // moment and a five-percent thrust surplus. Deterministic multi-start
  // damped least squares.
  std::vector<int> vars;
  for (int i : map.free_rotors) vars.push_back(kRotor1 + i);
  for (int i = kTilt1; i <= kTilt4; ++i) {
    if (!is_failed(failures, i)) vars.push_back(i);
  }
  const int nv = static_cast<int>(vars.size());
  const RigidBodyState state = RigidBodyState::level_at(Vec3(0, 0, -20));
  const double target = 1.05 * p.weight();

  auto assemble = [&](const Eigen::VectorXd& x) {
    ActuatorVector u = base;
    for (int j = 0; j < nv; ++j) u[vars[j]] = x[j];
    return u;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    const Wrench w = model::controlled_wrench(assemble(x), state, g, p);
    Eigen::VectorXd r(4);
    r.head<3>() = w.moment;
    r[3] = w.force.norm() - target;
    return r;
  };

  Eigen::VectorXd lo(nv), hi(nv), fd(nv);
  for (int j = 0; j < nv; ++j) {
    lo[j] = shrunk.lower[vars[j]];
    hi[j] = shrunk.upper[vars[j]];
    fd[j] = is_rotor_channel(vars[j]) ? 0.5 : 5e-4;
  }

  const double w_hover = std::sqrt(p.weight() / (4.0 * p.thrust_coeff));
  struct TiltStart {
    double chi[4];
  };
  static const TiltStart patterns[8] = {
      {{0.0, 0.0, 0.0, 0.0}},     {{0.2, -0.2, -0.2, 0.2}}, {{-0.2, 0.2, 0.2, -0.2}},
      {{0.3, 0.3, -0.3, -0.3}},   {{-0.3, -0.3, 0.3, 0.3}}, {{0.15, -0.15, 0.3, -0.3}},
      {{0.5, -0.5, -0.5, 0.5}},   {{-0.1, 0.1, -0.4, 0.4}},
  };

  double best = 1e300;
  for (double w_scale : {1.0, 1.2}) {
    for (const TiltStart& pat : patterns) {
      Eigen::VectorXd x0(nv);
      for (int j = 0; j < nv; ++j) {
        const int ch = vars[j];
        x0[j] = is_rotor_channel(ch) ? w_scale * w_hover : pat.chi[ch - kTilt1];
      }

      detail::LmProblem prob;
      prob.residual = residual;
      prob.x0 = x0;
      prob.lower = lo;
      prob.upper = hi;
      prob.fd_step = fd;
      prob.n_primary = 4;
      prob.primary_tol = 1e-9;
      prob.max_iterations = 150;
      detail::LmResult lm = detail::solve_levmar(prob);
      best = std::min(best, lm.primary_norm_inf);

      const ActuatorVector u = assemble(lm.x);
      const Wrench w = model::controlled_wrench(u, state, g, p);
      const double thrust = w.force.norm();
      if (w.moment.norm() <= 1e-6 && thrust >= p.weight()) {
        result.feasible = true;
        result.witness = u;
        result.thrust_margin = thrust - p.weight();
        result.moment_residual = w.moment.norm();
        result.diagnostic = "tilt-assisted witness (margin at the witness, not a maximum)";
        return result;
      }
    }
  }
  result.diagnostic = "no moment-free thrust profile found with tilts free";
  result.moment_residual = best;
  return result;
}

CruiseFeasibility cruise_check(const SamplingConfig& config,
                               const std::vector<FailureInfo>& failures, double airspeed) {
  const VehicleParams& p = config.params;
  CruiseFeasibility result;

  for (const FailureInfo& f : failures) {
    if (f.value < config.bounds.lower[f.index] || f.value > config.bounds.upper[f.index]) {
      result.diagnostic = "failure lock value outside the actuator box";
      return result;
    }
  }

  std::vector<std::pair<int, double>> pins;
  for (const FailureInfo& f : failures) pins.emplace_back(f.index, f.value);
  const ActuatorBounds shrunk = interior_box(config.bounds, failures);

  try {
    const alloc::TrimPoint trim = alloc::detail::cruise_trim_pinned(
        p, config.geometry, shrunk, airspeed, pins, Vec3(0, 0, -50));
    result.feasible = true;
    result.witness = trim.u0;
    result.witness_alpha = trim.state.pitch();
    const Wrench w = model::controlled_wrench(trim.u0, trim.state, config.geometry, p);
    const Vec3 f_inertial = trim.state.attitude * w.force;
    result.forward_force = f_inertial.x();
    result.upward_force = -f_inertial.z();
    result.moment_residual = w.moment.norm();
    result.diagnostic = "interior trim witness";
  } catch (const alloc::TrimNotFound& e) {
    result.diagnostic = e.what();
    result.moment_residual = e.best_residual;
  }
  return result;
}

}  // namespace tiltalloc::wrench_space
