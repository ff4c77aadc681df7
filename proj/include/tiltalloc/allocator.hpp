#pragma once

#include "tiltalloc/effectiveness.hpp"
#include "tiltalloc/qp.hpp"

namespace tiltalloc::alloc {

/// Objective weights on the squared setpoint deviation from trim,
/// per actuator group. The diagonal R is w / range^2 per channel, so
/// the cost is dimensionless and tilt motion is the most expensive.
struct AllocatorWeights {
  double rotor = 1.0;
  double tilt = 10.0;
  double surface = 1.0;
};

/// Relinearization cadence of the effectiveness matrix, in control steps.
struct AllocatorSettings {
  AllocatorWeights weights;
  FdSteps fd_steps;
  int relinearize_steady = 50;
  int relinearize_transition = 1;
};

/**
 * Everything allocate() needs, frozen at one linearization point: the
 * trim the objective pulls toward, the input u0 the step is taken from,
 * the Jacobian machinery, weights and bounds. Snapshots are immutable;
 * the simulator swaps in a fresh one when it relinearizes.
 */
struct AllocationModel {
  TrimPoint trim;
  ActuatorVector u0 = ActuatorVector::Zero();
  EffectivenessMatrix eff;
  Vec12 r_diag = Vec12::Ones();
  ActuatorBounds bounds;  // u units

  Vec12 v0() const { return to_alloc_vars(u0, eff.rotor_squared); }
  Vec12 v_trim() const { return to_alloc_vars(trim.u0, eff.rotor_squared); }
};

/// Build the snapshot: Jacobian at (state, u0), R from the weights,
/// t-variables on rotor channels when rotor_squared is set.
AllocationModel build_allocation_model(const VehicleParams& p, const RotorGeometry& g,
                                       const TrimPoint& trim, const RigidBodyState& state,
                                       const ActuatorVector& u0, bool rotor_squared,
                                       const std::vector<FailureInfo>& failures,
                                       const AllocatorSettings& settings,
                                       const ActuatorBounds& bounds);

/// Desired wrench, expressed relative to the wrench the model produces
/// at the snapshot input u0 in the current state.
struct AllocationRequest {
  Vec6 wrench = Vec6::Zero();
};

struct AllocationResult {
  ActuatorVector u_setpoint = ActuatorVector::Zero();
  Vec12 delta_v = Vec12::Zero();          // solved step, allocation variables
  Vec12 delta_least_norm = Vec12::Zero();  // pseudo-inverse part of the step
  Eigen::VectorXd lambda;                 // null-space coordinates
  Vec6 rhs = Vec6::Zero();                // failure-adjusted linear target
  double objective = 0.0;                 // (v_sp - v_trim)' R (v_sp - v_trim)
  double residual = 0.0;                  // |A_masked dv - rhs|, range mismatch included
  bool saturated = false;
  int qp_iterations = 0;
};

/// Minimum-norm solution of A_masked dv = rhs (failed rows zero).
Vec12 least_norm(const EffectivenessMatrix& eff, const Vec6& rhs);

/**
 * Null-space correction: choose lambda so v = v0 + dv_ln + N lambda
 * minimizes the trim-deviation objective inside the actuator box.
 * Reduced problem solved by the deterministic active-set QP. Returns
 * nullopt when the box cannot be reached (caller falls back to the
 * least-violation point).
 */
struct LambdaSolution {
  Eigen::VectorXd lambda;
  int iterations = 0;
  bool feasible = false;
};
LambdaSolution solve_lambda(const AllocationModel& model, const Vec12& dv_least_norm);

/// Full pipeline: failure-adjusted target, least-norm step, null-space
/// optimization, box handling. Pinned channels move exactly to their
/// lock values.
AllocationResult allocate(const AllocationModel& model, const AllocationRequest& request);

}  // namespace tiltalloc::alloc
