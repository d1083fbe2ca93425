#include <doctest.h>

#include <random>

#include "pacc/qp.hpp"

using namespace pacc;

TEST_CASE("scalar qp with an active bound") {
  QpProblem p;
  p.P = Eigen::MatrixXd::Identity(1, 1);
  p.q = Eigen::VectorXd::Constant(1, -3.0);  // unconstrained min at z = 3
  p.G = Eigen::MatrixXd::Ones(1, 1);
  p.h = Eigen::VectorXd::Ones(1);  // z <= 1
  const QpResult r = solve_qp(p);
  CHECK(r.status == QpStatus::kOptimal);
  CHECK(r.z[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.lambda[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("inactive constraints reproduce the unconstrained minimum") {
  QpProblem p;
  p.P = Eigen::MatrixXd::Identity(3, 3) * 2.0;
  p.q = Eigen::VectorXd::Zero(3);
  p.q << -2, 0, 4;
  p.G = Eigen::MatrixXd::Zero(2, 3);
  p.G(0, 0) = 1;
  p.G(1, 2) = -1;
  p.h = Eigen::VectorXd::Constant(2, 100.0);
  const QpResult r = solve_qp(p);
  CHECK(r.status == QpStatus::kOptimal);
  CHECK((r.z - Eigen::Vector3d(1, 0, -2)).norm() < 1e-7);
}

TEST_CASE("random box qps satisfy kkt to tolerance") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 8;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
    QpProblem p;
    p.P = a.transpose() * a + 0.1 * Eigen::MatrixXd::Identity(n, n);
    p.q = Eigen::VectorXd::NullaryExpr(n, [&] { return 3.0 * u(rng); });
    p.G = Eigen::MatrixXd::Zero(2 * n, n);
    p.h = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
      p.G(2 * i, i) = 1.0;
      p.h(2 * i) = 0.5;
      p.G(2 * i + 1, i) = -1.0;
      p.h(2 * i + 1) = 0.5;
    }
    const QpResult r = solve_qp(p);
    CHECK(r.status == QpStatus::kOptimal);
    CHECK(r.dual_residual < 1e-6);
    CHECK(r.primal_residual < 1e-6);
    CHECK(r.complementarity < 1e-6);
    CHECK(r.z.cwiseAbs().maxCoeff() <= 0.5 + 1e-7);
    // multipliers are nonnegative
    CHECK(r.lambda.minCoeff() > -1e-10);
  }
}

TEST_CASE("projection onto a box matches the closed form") {
  const int n = 5;
  QpProblem p;
  p.P = 2.0 * Eigen::MatrixXd::Identity(n, n);
  p.q = Eigen::VectorXd::Zero(n);
  p.q << -4, 3, 0.2, -0.1, 9;  // minimize ||z - z0||^2 with z0 = -q/2
  p.G = Eigen::MatrixXd::Zero(2 * n, n);
  p.h = Eigen::VectorXd::Constant(2 * n, 1.0);
  for (int i = 0; i < n; ++i) {
    p.G(2 * i, i) = 1.0;
    p.G(2 * i + 1, i) = -1.0;
  }
  const QpResult r = solve_qp(p);
  const Eigen::VectorXd z0 = -0.5 * p.q;
  for (int i = 0; i < n; ++i) {
    CHECK(r.z[i] == doctest::Approx(std::clamp(z0[i], -1.0, 1.0)).epsilon(1e-6));
  }
}
