#include "tiltalloc/qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace tiltalloc::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solve the equality-constrained subproblem for the step direction when
// constraint row c_new is driven toward its boundary while the rows in
// `active` stay tight:
//   z = primal direction, r = rate of change of the active multipliers.
// Plain dense solves; problems here have at most six variables.
// Returns c_new' H^-1 c_new, the natural curvature scale for deciding
// whether the projected direction has truly vanished.
double step_directions(const Eigen::LDLT<Eigen::MatrixXd>& h_ldlt, const MatrixXd& c,
                       const std::vector<int>& active, const VectorXd& c_new, VectorXd& z,
                       VectorXd& r) {
  const VectorXd hinv_cnew = h_ldlt.solve(c_new);
  const double curvature = c_new.dot(hinv_cnew);
  const int na = static_cast<int>(active.size());
  if (na == 0) {
    z = hinv_cnew;
    r.resize(0);
    return curvature;
  }
  MatrixXd n(c.cols(), na);
  for (int j = 0; j < na; ++j) n.col(j) = c.row(active[j]).transpose();
  const MatrixXd hinv_n = h_ldlt.solve(n);
  const MatrixXd small = n.transpose() * hinv_n;  // na x na, SPD when rows independent
  r = small.ldlt().solve(n.transpose() * hinv_cnew);
  z = hinv_cnew - hinv_n * r;
  return curvature;
}

}  // namespace

QpResult solve_qp(const MatrixXd& H, const VectorXd& g, const MatrixXd& C, const VectorXd& d) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(C.rows());

  QpResult result;
  result.multipliers = VectorXd::Zero(m);

  Eigen::LDLT<MatrixXd> h_ldlt(H);
  VectorXd x = h_ldlt.solve(-g);

  // Work on row-normalized constraints so feasibility tolerances mean the
  // same thing on every row. Rows with a vanishing normal are constant:
  // either trivially satisfied or proof of infeasibility.
  MatrixXd cn = C;
  VectorXd dn = d;
  VectorXd row_norm = VectorXd::Ones(m);
  std::vector<bool> degenerate(m, false);
  for (int i = 0; i < m; ++i) {
    const double nrm = cn.row(i).norm();
    if (nrm < 1e-14) {
      degenerate[i] = true;
      if (dn[i] < -1e-12) {
        result.status = QpStatus::kInfeasible;
        result.x = x;
        return result;
      }
      continue;
    }
    row_norm[i] = nrm;
    cn.row(i) /= nrm;
    dn[i] /= nrm;
  }

  constexpr double kFeasTol = 1e-10;
  std::vector<int> active;
  VectorXd u(0);  // multipliers of the active rows, same order as `active`

  const int iter_cap = 12 * (m + n) + 60;
  for (result.iterations = 0; result.iterations < iter_cap; ++result.iterations) {
    // Lowest-index violated constraint keeps the pivot order reproducible.
    int p = -1;
    for (int i = 0; i < m; ++i) {
      if (degenerate[i]) continue;
      bool in_active = false;
      for (int a : active) {
        if (a == i) { in_active = true; break; }
      }
      if (in_active) continue;
      if (cn.row(i).dot(x) - dn[i] > kFeasTol) {
        p = i;
        break;
      }
    }
    if (p < 0) {
      // Multipliers were accumulated against unit-norm rows; scale back
      // to the caller's rows.
      for (size_t j = 0; j < active.size(); ++j) {
        result.multipliers[active[j]] = u[j] / row_norm[active[j]];
      }
      result.status = QpStatus::kOptimal;
      result.x = x;
      result.objective = 0.5 * x.dot(H * x) + g.dot(x);
      return result;
    }

    // Drive row p to its boundary. The violated side is c.x > d, so the
    // primal moves along -z where z solves the projected system.
    const VectorXd c_p = cn.row(p).transpose();
    double u_p = 0.0;
    while (true) {
      VectorXd z, r;
      const double curvature = step_directions(h_ldlt, cn, active, c_p, z, r);
      const double zc = c_p.dot(z);  // equals z'Hz, nonnegative

      // Full step: reach the boundary of row p.
      const double s_p = c_p.dot(x) - dn[p];
      double t_primal = kInf;
      if (zc > 1e-12 * std::max(curvature, 1e-300)) t_primal = s_p / zc;

      // Dual blocking step: an active multiplier would hit zero
      // (multipliers move as u -= t*r while mu_p grows by t).
      double t_dual = kInf;
      int blocking = -1;
      for (int j = 0; j < r.size(); ++j) {
        if (r[j] > 1e-13) {
          const double t = u[j] / r[j];
          if (t < t_dual) {
            t_dual = t;
            blocking = j;
          }
        }
      }

      if (t_primal == kInf && t_dual == kInf) {
        result.status = QpStatus::kInfeasible;
        result.x = x;
        return result;
      }

      const double t = std::min(t_primal, t_dual);
      if (t > 0.0) {
        x -= t * z;
        for (int j = 0; j < r.size(); ++j) u[j] -= t * r[j];
        u_p += t;
      }

      if (t_primal <= t_dual) {
        // Row p is tight now; admit it to the active set.
        active.push_back(p);
        VectorXd u_new(u.size() + 1);
        u_new.head(u.size()) = u;
        u_new[u.size()] = u_p;
        u = u_new;
        break;
      }
      // Drop the blocking row and keep pushing toward row p.
      active.erase(active.begin() + blocking);
      VectorXd u_red(u.size() - 1);
      int k = 0;
      for (int j = 0; j < u.size(); ++j) {
        if (j != blocking) u_red[k++] = u[j];
      }
      u = u_red;
    }
  }

  result.status = QpStatus::kIterLimit;
  result.x = x;
  return result;
}

}  // namespace tiltalloc::qp
