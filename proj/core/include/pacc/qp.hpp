#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pacc {

// Dense convex QP:  min 1/2 z^T P z + q^T z  s.t.  G z <= h.
// Solved with a Mehrotra predictor-corrector interior point method on the
// normal equations; constraint rows are treated sparsely when forming them.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
};

struct QpSettings {
  int max_iterations = 60;
  double tol_gap = 1e-9;
  double tol_feasibility = 1e-9;
  double regularization = 1e-9;
};

enum class QpStatus { kOptimal, kMaxIterations };

struct QpResult {
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;  // inequality multipliers
  Eigen::VectorXd slack;
  QpStatus status = QpStatus::kMaxIterations;
  int iterations = 0;
  double dual_residual = 0.0;    // ||Pz + q + G^T lambda||_inf, scaled
  double primal_residual = 0.0;  // ||max(Gz - h, 0)||_inf, scaled
  double complementarity = 0.0;  // s^T lambda / m
};

QpResult solve_qp(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace pacc
