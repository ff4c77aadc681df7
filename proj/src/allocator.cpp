#include "tiltalloc/allocator.hpp"

#include <cmath>

namespace tiltalloc::alloc {

AllocationModel build_allocation_model(const VehicleParams& p, const RotorGeometry& g,
                                       const TrimPoint& trim, const RigidBodyState& state,
                                       const ActuatorVector& u0, bool rotor_squared,
                                       const std::vector<FailureInfo>& failures,
                                       const AllocatorSettings& settings,
                                       const ActuatorBounds& bounds) {
  AllocationModel m;
  m.trim = trim;
  m.u0 = u0;
  m.eff = effectiveness(p, g, state, u0, rotor_squared, failures, settings.fd_steps);
  m.bounds = alloc_bounds(bounds, rotor_squared);

  // Normalizing each weight by the squared channel range makes the cost
  // dimensionless, so rotors, tilts and surfaces compete on comparable
  // footing no matter which variable scaling is active.
  for (int i = 0; i < kNumActuators; ++i) {
    double w;
    if (is_rotor_channel(i)) {
      w = settings.weights.rotor;
    } else if (is_tilt_channel(i)) {
      w = settings.weights.tilt;
    } else {
      w = settings.weights.surface;
    }
    const double r = std::max(m.bounds.range(i), 1e-9);
    m.r_diag[i] = w / (r * r);
  }
  return m;
}

Vec12 least_norm(const EffectivenessMatrix& eff, const Vec6& rhs) {
  return eff.pseudo_inverse * rhs;
}

LambdaSolution solve_lambda(const AllocationModel& model, const Vec12& dv_least_norm) {
  LambdaSolution out;
  const Eigen::MatrixXd& n = model.eff.null_basis;
  const int r = static_cast<int>(n.cols());
  out.lambda = Eigen::VectorXd::Zero(r);
  if (r == 0) {
    out.feasible = true;
    return out;
  }

  // argmin over lambda of (v - v_trim)' R (v - v_trim) with
  // v = v0 + dv_ln + N lambda, inside the box. Failed channels have zero
  // rows in N and dv_ln, so they contribute nothing here; their pinned
  // motion is constant with respect to lambda.
  const Vec12 base = model.v0() + dv_least_norm;
  const Vec12 offset = base - model.v_trim();
  const Eigen::MatrixXd rn = model.r_diag.asDiagonal() * n;
  Eigen::MatrixXd h = n.transpose() * rn;
  Eigen::VectorXd g = rn.transpose() * offset;

  // Jacobi preconditioning. Null directions living in rotor-squared
  // channels carry weights many orders below the angle channels; scaling
  // the coordinates to unit curvature keeps the QP algebra accurate.
  Eigen::VectorXd scale(r);
  for (int j = 0; j < r; ++j) scale[j] = 1.0 / std::sqrt(std::max(h(j, j), 1e-300));
  h = scale.asDiagonal() * h * scale.asDiagonal();
  g = scale.asDiagonal() * g;

  std::vector<int> rows;
  rows.reserve(kNumActuators);
  for (int i = 0; i < kNumActuators; ++i) {
    if (!model.eff.is_failed(i)) rows.push_back(i);
  }
  const int nc = static_cast<int>(rows.size());
  Eigen::MatrixXd c(2 * nc, r);
  Eigen::VectorXd d(2 * nc);
  for (int j = 0; j < nc; ++j) {
    const int i = rows[j];
    c.row(j) = n.row(i) * scale.asDiagonal();
    d[j] = model.bounds.upper[i] - base[i];
    c.row(nc + j) = -c.row(j);
    d[nc + j] = base[i] - model.bounds.lower[i];
  }

  qp::QpResult sol = qp::solve_qp(h, g, c, d);
  out.feasible = sol.status == qp::QpStatus::kOptimal;
  out.iterations = sol.iterations;
  if (out.feasible) out.lambda = scale.asDiagonal() * sol.x;
  return out;
}

AllocationResult allocate(const AllocationModel& model, const AllocationRequest& request) {
  AllocationResult res;
  const Vec12 v0 = model.v0();

  // Pinned channels move exactly to their lock values; their wrench
  // contribution (through the unmasked columns) moves to the right-hand
  // side so the free channels solve for the remainder.
  Vec12 delta_pinned = Vec12::Zero();
  Vec6 rhs = request.wrench;
  for (const FailureInfo& f : model.eff.failures) {
    const double v_f = model.eff.rotor_squared && is_rotor_channel(f.index)
                           ? f.value * f.value
                           : f.value;
    delta_pinned[f.index] = v_f - v0[f.index];
    rhs -= model.eff.jacobian.col(f.index) * delta_pinned[f.index];
  }
  res.rhs = rhs;

  res.delta_least_norm = least_norm(model.eff, rhs);
  const Eigen::MatrixXd& n = model.eff.null_basis;
  const int r = static_cast<int>(n.cols());

  LambdaSolution lam = solve_lambda(model, res.delta_least_norm);
  res.lambda = lam.lambda;
  res.qp_iterations = lam.iterations;

  Vec12 v_sp = v0 + res.delta_least_norm + delta_pinned;
  if (r > 0 && lam.feasible) {
    v_sp += n * lam.lambda;
  } else if (r > 0) {
    // No in-bounds point realizes the target exactly. Fall back to the
    // box-constrained least-squares compromise: minimize the wrench error
    // itself over the box, so whatever is achievable still points at the
    // request instead of scattering. Moments outrank forces - a Newton of
    // unmet lift costs altitude, a Newton-meter of unmet moment costs the
    // vehicle. Solved exactly with the same dual active-set engine, on
    // column-scaled coordinates; a whisper of Tikhonov makes the Hessian
    // positive definite and keeps idle channels idle.
    static const Vec6 row_weight = (Vec6() << 4.0, 4.0, 2.0, 1.0, 1.0, 1.0).finished();
    const Mat6x12 a = row_weight.asDiagonal() * model.eff.jacobian_masked;
    const Vec6 rhs_w = row_weight.asDiagonal() * rhs;

    std::vector<int> free_idx;
    free_idx.reserve(kNumActuators);
    for (int i = 0; i < kNumActuators; ++i) {
      if (!model.eff.is_failed(i)) free_idx.push_back(i);
    }
    const int nf = static_cast<int>(free_idx.size());
    double max_norm = 0.0;
    for (int i : free_idx) max_norm = std::max(max_norm, a.col(i).norm());
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(nf);
    Eigen::MatrixXd b(6, nf);
    for (int j = 0; j < nf; ++j) {
      const double cn = a.col(free_idx[j]).norm();
      if (cn > 1e-12 * max_norm) col_scale[j] = 1.0 / cn;
      b.col(j) = a.col(free_idx[j]) * col_scale[j];
    }

    const double mu = 1e-8 * std::max(b.squaredNorm() / nf, 1e-12);
    Eigen::MatrixXd h = b.transpose() * b + mu * Eigen::MatrixXd::Identity(nf, nf);
    Eigen::VectorXd grad0 = -b.transpose() * rhs_w;
    Eigen::MatrixXd c(2 * nf, nf);
    Eigen::VectorXd d(2 * nf);
    c.setZero();
    for (int j = 0; j < nf; ++j) {
      const int i = free_idx[j];
      c(j, j) = 1.0;
      d[j] = (model.bounds.upper[i] - v0[i]) / col_scale[j];
      c(nf + j, j) = -1.0;
      d[nf + j] = (v0[i] - model.bounds.lower[i]) / col_scale[j];
    }

    qp::QpResult sol = qp::solve_qp(h, grad0, c, d);
    v_sp = v0 + delta_pinned;
    if (sol.status == qp::QpStatus::kOptimal) {
      for (int j = 0; j < nf; ++j) v_sp[free_idx[j]] += col_scale[j] * sol.x[j];
    } else {
      // Last resort: the clamped least-norm point (v0 sits in the box, so
      // the QP cannot actually fail; this keeps the path total anyway).
      for (int j = 0; j < nf; ++j) {
        const int i = free_idx[j];
        v_sp[i] += std::clamp(res.delta_least_norm[i], model.bounds.lower[i] - v0[i],
                              model.bounds.upper[i] - v0[i]);
      }
    }
    res.qp_iterations += sol.iterations;
    res.saturated = true;
  }

  // Final safety clamp; a feasible QP solution is already inside.
  for (int i = 0; i < kNumActuators; ++i) {
    if (model.eff.is_failed(i)) continue;
    if (v_sp[i] < model.bounds.lower[i]) {
      v_sp[i] = model.bounds.lower[i];
      res.saturated = true;
    } else if (v_sp[i] > model.bounds.upper[i]) {
      v_sp[i] = model.bounds.upper[i];
      res.saturated = true;
    }
  }

  res.delta_v = v_sp - v0;
  res.u_setpoint = from_alloc_vars(v_sp, model.eff.rotor_squared);

  Vec12 delta_free = res.delta_v;
  for (const FailureInfo& f : model.eff.failures) delta_free[f.index] = 0.0;
  res.residual = (model.eff.jacobian_masked * delta_free - rhs).norm();
  const Vec12 dev = v_sp - model.v_trim();
  res.objective = dev.dot(model.r_diag.asDiagonal() * dev);
  return res;
}

}  // namespace tiltalloc::alloc
