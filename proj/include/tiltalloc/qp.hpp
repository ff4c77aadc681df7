#pragma once

#include <Eigen/Dense>

namespace tiltalloc::qp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class QpStatus {
  kOptimal,
  kInfeasible,   // constraints have an empty intersection
  kIterLimit,    // did not settle within the iteration cap
};

struct QpResult {
  QpStatus status = QpStatus::kIterLimit;
  VectorXd x;            // primal solution (or last iterate)
  VectorXd multipliers;  // one per constraint row, >= 0, nonzero only on active rows
  int iterations = 0;
  double objective = 0.0;
};

/**
 * Minimize 0.5 x'Hx + g'x subject to C x <= d.
 *
 * Dual active-set iteration for small dense problems. H must be symmetric
 * positive definite, which makes the minimizer unique. The violated
 * constraint with the lowest row index is activated first, so the pivot
 * sequence (and the floating-point result) is reproducible run to run.
 */
QpResult solve_qp(const MatrixXd& H, const VectorXd& g, const MatrixXd& C, const VectorXd& d);

}  // namespace tiltalloc::qp
