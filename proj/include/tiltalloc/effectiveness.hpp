#pragma once

#include <vector>

#include "tiltalloc/model.hpp"
#include "tiltalloc/trim.hpp"

namespace tiltalloc::alloc {

/// Central-difference steps for the wrench Jacobian.
struct FdSteps {
  double rotor = 1.0;   // rad/s
  double angle = 1e-3;  // rad
};

/**
 * Allocation works on a variable vector v that equals u except that in
 * rotor-squared mode the four rotor channels carry t = w^2, where the
 * hover wrench map is exactly linear.
 */
Vec12 to_alloc_vars(const ActuatorVector& u, bool rotor_squared);
ActuatorVector from_alloc_vars(const Vec12& v, bool rotor_squared);
ActuatorBounds alloc_bounds(const ActuatorBounds& u_bounds, bool rotor_squared);

/// Relative singular-value cutoff for rank, pseudo-inverse and null basis.
inline constexpr double kSvdThreshold = 1e-10;

/**
 * Wrench Jacobian at an operating point, with the machinery the allocator
 * needs: the untouched Jacobian, the failure-masked copy, its
 * pseudo-inverse and an orthonormal basis of its null space. Failed
 * columns are removed before the decomposition; the pseudo-inverse and
 * null basis carry zero rows at failed channels so everything stays
 * 12-dimensional.
 */
struct EffectivenessMatrix {
  Mat6x12 jacobian = Mat6x12::Zero();         // original columns, v-space
  Mat6x12 jacobian_masked = Mat6x12::Zero();  // failed columns zeroed
  Eigen::Matrix<double, 12, 6> pseudo_inverse = Eigen::Matrix<double, 12, 6>::Zero();
  Eigen::MatrixXd null_basis;  // 12 x r, orthonormal columns, zero rows at failed channels
  int rank = 0;
  bool rotor_squared = false;
  std::vector<FailureInfo> failures;  // values in u units

  bool is_failed(int channel) const;
};

/// Central finite differences of the controlled wrench about (state, u0),
/// assembled per the struct contract above.
EffectivenessMatrix effectiveness(const VehicleParams& p, const RotorGeometry& g,
                                  const RigidBodyState& state, const ActuatorVector& u0,
                                  bool rotor_squared, const std::vector<FailureInfo>& failures,
                                  const FdSteps& steps = {});

}  // namespace tiltalloc::alloc
