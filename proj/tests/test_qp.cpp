#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "tiltalloc/qp.hpp"

using namespace tiltalloc;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using doctest::Approx;

namespace {

// Airtight optimality oracle for a convex QP: feasibility, stationarity,
// sign and complementary slackness of the returned multipliers.
void check_kkt(const MatrixXd& H, const VectorXd& g, const MatrixXd& C, const VectorXd& d,
               const qp::QpResult& res) {
  REQUIRE(res.status == qp::QpStatus::kOptimal);
  const double scale = 1.0 + g.norm() + res.x.norm();
  if (C.rows() > 0) {
    const VectorXd slack = C * res.x - d;
    CHECK(slack.maxCoeff() <= 1e-8 * scale);
    CHECK(res.multipliers.minCoeff() >= -1e-10);
    for (int i = 0; i < C.rows(); ++i) {
      CHECK(std::abs(res.multipliers[i] * slack[i]) <= 1e-7 * scale);
    }
    VectorXd grad = H * res.x + g + C.transpose() * res.multipliers;
    CHECK(grad.norm() <= 1e-7 * scale);
  } else {
    CHECK((H * res.x + g).norm() <= 1e-9 * scale);
  }
}

}  // namespace

TEST_CASE("unconstrained minimum is the Newton point") {
  MatrixXd H = MatrixXd::Identity(2, 2);
  VectorXd g(2);
  g << -2.0, -4.0;
  MatrixXd C(0, 2);
  VectorXd d(0);
  auto res = qp::solve_qp(H, g, C, d);
  REQUIRE(res.status == qp::QpStatus::kOptimal);
  CHECK(res.x[0] == Approx(2.0).epsilon(1e-12));
  CHECK(res.x[1] == Approx(4.0).epsilon(1e-12));
}

TEST_CASE("box clamps only the violated coordinate") {
  // min ||x - [0.8, 0.1]||^2 inside [0, 0.6]^2 -> [0.6, 0.1]
  MatrixXd H = 2.0 * MatrixXd::Identity(2, 2);
  VectorXd g(2);
  g << -1.6, -0.2;
  MatrixXd C(4, 2);
  C << 1, 0, 0, 1, -1, 0, 0, -1;
  VectorXd d(4);
  d << 0.6, 0.6, 0.0, 0.0;
  auto res = qp::solve_qp(H, g, C, d);
  check_kkt(H, g, C, d, res);
  CHECK(res.x[0] == Approx(0.6).epsilon(1e-10));
  CHECK(res.x[1] == Approx(0.1).epsilon(1e-10));
}

TEST_CASE("single active constraint reports its multiplier") {
  // min x^2/2 s.t. x <= -3: optimum -3, gradient -3 balanced by mu = 3.
  MatrixXd H(1, 1);
  H << 1.0;
  VectorXd g = VectorXd::Zero(1);
  MatrixXd C(1, 1);
  C << 1.0;
  VectorXd d(1);
  d << -3.0;
  auto res = qp::solve_qp(H, g, C, d);
  check_kkt(H, g, C, d, res);
  CHECK(res.x[0] == Approx(-3.0).epsilon(1e-12));
  CHECK(res.multipliers[0] == Approx(3.0).epsilon(1e-10));
}

TEST_CASE("crossing halfplanes force the corner") {
  // min ||x||^2 with x0 + x1 <= -2 and x0 - x1 <= -1.
  // Optimum at the intersection [-1.5, -0.5].
  MatrixXd H = 2.0 * MatrixXd::Identity(2, 2);
  VectorXd g = VectorXd::Zero(2);
  MatrixXd C(2, 2);
  C << 1, 1, 1, -1;
  VectorXd d(2);
  d << -2.0, -1.0;
  auto res = qp::solve_qp(H, g, C, d);
  check_kkt(H, g, C, d, res);
  CHECK(res.x[0] == Approx(-1.5).epsilon(1e-10));
  CHECK(res.x[1] == Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("contradictory bounds are reported infeasible") {
  MatrixXd H = MatrixXd::Identity(1, 1);
  VectorXd g = VectorXd::Zero(1);
  MatrixXd C(2, 1);
  C << 1.0, -1.0;
  VectorXd d(2);
  d << 0.0, -1.0;  // x <= 0 and x >= 1
  auto res = qp::solve_qp(H, g, C, d);
  CHECK(res.status == qp::QpStatus::kInfeasible);
}

TEST_CASE("zero constraint rows are constants, not directions") {
  MatrixXd H = MatrixXd::Identity(1, 1);
  VectorXd g(1);
  g << -1.0;

  MatrixXd C = MatrixXd::Zero(1, 1);
  VectorXd d(1);

  d << 1.0;  // 0 <= 1 always holds
  auto ok = qp::solve_qp(H, g, C, d);
  REQUIRE(ok.status == qp::QpStatus::kOptimal);
  CHECK(ok.x[0] == Approx(1.0).epsilon(1e-12));

  d << -1.0;  // 0 <= -1 never holds
  auto bad = qp::solve_qp(H, g, C, d);
  CHECK(bad.status == qp::QpStatus::kInfeasible);
}

TEST_CASE("random problems satisfy the KKT conditions") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> spread(0.3, 2.0);

  for (int trial = 0; trial < 400; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 5);  // 1..5 variables
    MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = n(rng);
    MatrixXd H = a.transpose() * a + 0.05 * MatrixXd::Identity(dim, dim);
    VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g[i] = 2.0 * n(rng);

    // A box plus a few random halfplanes through points near the origin,
    // so the feasible set is never empty.
    const int extra = static_cast<int>(rng() % 3);
    MatrixXd C(2 * dim + extra, dim);
    VectorXd d(2 * dim + extra);
    VectorXd inner(dim);
    for (int i = 0; i < dim; ++i) inner[i] = 0.2 * n(rng);
    for (int i = 0; i < dim; ++i) {
      C.row(i).setZero();
      C(i, i) = 1.0;
      d[i] = inner[i] + spread(rng);
      C.row(dim + i).setZero();
      C(dim + i, i) = -1.0;
      d[dim + i] = -(inner[i] - spread(rng));
    }
    for (int e = 0; e < extra; ++e) {
      for (int j = 0; j < dim; ++j) C(2 * dim + e, j) = n(rng);
      d[2 * dim + e] = C.row(2 * dim + e).dot(inner) + 0.1;
    }

    auto res = qp::solve_qp(H, g, C, d);
    check_kkt(H, g, C, d, res);
  }
}

TEST_CASE("objective matches a fine grid search in two variables") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd a(2, 2);
    a << n(rng), n(rng), n(rng), n(rng);
    MatrixXd H = a.transpose() * a + 0.1 * MatrixXd::Identity(2, 2);
    VectorXd g(2);
    g << n(rng), n(rng);
    MatrixXd C(4, 2);
    C << 1, 0, 0, 1, -1, 0, 0, -1;
    VectorXd d(4);
    d << 0.8, 0.8, 0.8, 0.8;  // box [-0.8, 0.8]^2

    auto res = qp::solve_qp(H, g, C, d);
    REQUIRE(res.status == qp::QpStatus::kOptimal);

    double best = 1e300;
    const double h = 1e-3;
    for (double x0 = -0.8; x0 <= 0.8 + 1e-12; x0 += h) {
      for (double x1 = -0.8; x1 <= 0.8 + 1e-12; x1 += h) {
        VectorXd x(2);
        x << x0, x1;
        best = std::min(best, 0.5 * x.dot(H * x) + g.dot(x));
      }
    }
    // The solver can only be better than the grid, and the grid is at
    // most one step of objective away from the continuum optimum.
    CHECK(res.objective <= best + 1e-9);
    const double lipschitz = (H.cwiseAbs().sum() * 0.8 + g.cwiseAbs().sum()) * h * 2.0;
    CHECK(best <= res.objective + lipschitz);
  }
}

TEST_CASE("identical inputs give bitwise identical results") {
  MatrixXd H(3, 3);
  H << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  VectorXd g(3);
  g << -1, 2, -0.5;
  MatrixXd C(6, 3);
  C << MatrixXd::Identity(3, 3), -MatrixXd::Identity(3, 3);
  VectorXd d(6);
  d << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;

  auto r1 = qp::solve_qp(H, g, C, d);
  auto r2 = qp::solve_qp(H, g, C, d);
  REQUIRE(r1.status == qp::QpStatus::kOptimal);
  CHECK(r1.iterations == r2.iterations);
  CHECK((r1.x.array() == r2.x.array()).all());
  CHECK((r1.multipliers.array() == r2.multipliers.array()).all());
}
