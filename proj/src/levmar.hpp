#pragma once

#include <Eigen/Dense>
#include <functional>

namespace tiltalloc::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Box-projected Levenberg-Marquardt on a generic residual vector.
/// Jacobian by central differences with per-variable steps. The first
/// n_primary residual components are the ones that must actually vanish;
/// the rest may be soft regularization terms.
struct LmProblem {
  std::function<VectorXd(const VectorXd&)> residual;
  VectorXd x0;
  VectorXd lower;
  VectorXd upper;
  VectorXd fd_step;
  int n_primary = 0;
  double primary_tol = 1e-9;  // max-norm target on the primary block
  int max_iterations = 150;
};

struct LmResult {
  VectorXd x;
  double primary_norm_inf = 1e300;
  int iterations = 0;
  bool converged = false;
};

inline LmResult solve_levmar(const LmProblem& prob) {
  const int n = static_cast<int>(prob.x0.size());
  VectorXd x = prob.x0.cwiseMax(prob.lower).cwiseMin(prob.upper);
  VectorXd r = prob.residual(x);
  const int m = static_cast<int>(r.size());

  auto primary_norm = [&](const VectorXd& res) {
    return res.head(prob.n_primary).cwiseAbs().maxCoeff();
  };

  LmResult out;
  out.x = x;
  out.primary_norm_inf = primary_norm(r);

  double lambda = 1e-3;
  for (int it = 0; it < prob.max_iterations; ++it) {
    out.iterations = it + 1;
    if (primary_norm(r) <= prob.primary_tol) break;

    MatrixXd j(m, n);
    for (int k = 0; k < n; ++k) {
      const double h = prob.fd_step[k];
      VectorXd xp = x, xm = x;
      xp[k] = std::min(x[k] + h, prob.upper[k]);
      xm[k] = std::max(x[k] - h, prob.lower[k]);
      const double span = xp[k] - xm[k];
      if (span <= 0.0) {
        j.col(k).setZero();
        continue;
      }
      j.col(k) = (prob.residual(xp) - prob.residual(xm)) / span;
    }

    const MatrixXd jtj = j.transpose() * j;
    const VectorXd jtr = j.transpose() * r;
    if (jtr.cwiseAbs().maxCoeff() < 1e-14) break;

    bool stepped = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      MatrixXd lhs = jtj;
      for (int k = 0; k < n; ++k) {
        lhs(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      }
      const VectorXd dx = lhs.ldlt().solve(-jtr);
      VectorXd x_try = (x + dx).cwiseMax(prob.lower).cwiseMin(prob.upper);
      VectorXd r_try = prob.residual(x_try);
      if (r_try.squaredNorm() < r.squaredNorm()) {
        x = x_try;
        r = r_try;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) break;  // no downhill step at any damping: local floor

    if (primary_norm(r) < out.primary_norm_inf) {
      out.x = x;
      out.primary_norm_inf = primary_norm(r);
    }
  }

  if (primary_norm(r) < out.primary_norm_inf) {
    out.x = x;
    out.primary_norm_inf = primary_norm(r);
  }
  out.converged = out.primary_norm_inf <= prob.primary_tol;
  return out;
}

}  // namespace tiltalloc::detail
