#include "tiltalloc/effectiveness.hpp"

#include <cmath>

namespace tiltalloc::alloc {

Vec12 to_alloc_vars(const ActuatorVector& u, bool rotor_squared) {
  Vec12 v = u;
  if (rotor_squared) {
    for (int i = kRotor1; i <= kRotor4; ++i) v[i] = u[i] * u[i];
  }
  return v;
}

ActuatorVector from_alloc_vars(const Vec12& v, bool rotor_squared) {
  ActuatorVector u = v;
  if (rotor_squared) {
    for (int i = kRotor1; i <= kRotor4; ++i) u[i] = std::sqrt(std::max(v[i], 0.0));
  }
  return u;
}

ActuatorBounds alloc_bounds(const ActuatorBounds& u_bounds, bool rotor_squared) {
  ActuatorBounds b = u_bounds;
  if (rotor_squared) {
    for (int i = kRotor1; i <= kRotor4; ++i) {
      b.lower[i] = u_bounds.lower[i] * u_bounds.lower[i];
      b.upper[i] = u_bounds.upper[i] * u_bounds.upper[i];
    }
  }
  return b;
}

bool EffectivenessMatrix::is_failed(int channel) const {
  for (const FailureInfo& f : failures) {
    if (f.index == channel) return true;
  }
  return false;
}

EffectivenessMatrix effectiveness(const VehicleParams& p, const RotorGeometry& g,
                                  const RigidBodyState& state, const ActuatorVector& u0,
                                  bool rotor_squared, const std::vector<FailureInfo>& failures,
                                  const FdSteps& steps) {
  EffectivenessMatrix eff;
  eff.rotor_squared = rotor_squared;
  eff.failures = failures;

  const Vec12 v0 = to_alloc_vars(u0, rotor_squared);
  auto wrench_at = [&](const Vec12& v) {
    return model::controlled_wrench(from_alloc_vars(v, rotor_squared), state, g, p).vec();
  };

  for (int k = 0; k < kNumActuators; ++k) {
    double h;
    if (is_rotor_channel(k)) {
      // In t = w^2 the map is linear, so the step size only needs to
      // dodge roundoff; in w it is the configured physical step.
      h = rotor_squared ? std::max(1.0, 2.0 * u0[k] * steps.rotor) : steps.rotor;
    } else {
      h = steps.angle;
    }
    Vec12 vp = v0, vm = v0;
    vp[k] = v0[k] + h;
    vm[k] = v0[k] - h;
    if (rotor_squared && is_rotor_channel(k)) vm[k] = std::max(vm[k], 0.0);
    const double span = vp[k] - vm[k];
    eff.jacobian.col(k) = (wrench_at(vp) - wrench_at(vm)) / span;
  }

  eff.jacobian_masked = eff.jacobian;
  for (const FailureInfo& f : failures) eff.jacobian_masked.col(f.index).setZero();

  // Decompose with failed columns removed entirely, then re-embed with
  // zero rows so downstream algebra stays 12-wide.
  std::vector<int> free_cols;
  free_cols.reserve(kNumActuators);
  for (int k = 0; k < kNumActuators; ++k) {
    if (!eff.is_failed(k)) free_cols.push_back(k);
  }
  const int nf = static_cast<int>(free_cols.size());
  Eigen::MatrixXd a_red(6, nf);
  for (int j = 0; j < nf; ++j) a_red.col(j) = eff.jacobian.col(free_cols[j]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_red, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? kSvdThreshold * sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  eff.rank = rank;

  Eigen::MatrixXd pinv_red = Eigen::MatrixXd::Zero(nf, 6);
  for (int i = 0; i < rank; ++i) {
    pinv_red += svd.matrixV().col(i) * (svd.matrixU().col(i).transpose() / sv[i]);
  }
  const int null_dim = nf - rank;
  Eigen::MatrixXd null_red = svd.matrixV().rightCols(null_dim);

  eff.pseudo_inverse.setZero();
  eff.null_basis = Eigen::MatrixXd::Zero(kNumActuators, null_dim);
  for (int j = 0; j < nf; ++j) {
    eff.pseudo_inverse.row(free_cols[j]) = pinv_red.row(j);
    eff.null_basis.row(free_cols[j]) = null_red.row(j);
  }
  return eff;
}

}  // namespace tiltalloc::alloc
