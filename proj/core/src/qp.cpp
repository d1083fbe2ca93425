#include "pacc/qp.hpp"

#include <cmath>

namespace pacc {
namespace {

// Largest alpha in [0, 1] keeping v + alpha dv >= (1 - tau) v elementwise positive.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem, const QpSettings& settings) {
  const int n = static_cast<int>(problem.P.rows());
  const int m = static_cast<int>(problem.G.rows());

  QpResult result;
  result.z = Eigen::VectorXd::Zero(n);

  Eigen::MatrixXd preg = problem.P;
  preg.diagonal().array() += settings.regularization;

  if (m == 0) {
    result.z = preg.ldlt().solve(-problem.q);
    result.status = QpStatus::kOptimal;
    return result;
  }

  // nonzero pattern per row; most rows (friction boxes, slack bounds) touch
  // only a few variables, so the normal matrix is accumulated row-wise.
  std::vector<std::vector<int>> row_nnz(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (problem.G(i, j) != 0.0) row_nnz[i].push_back(j);
    }
  }

  Eigen::VectorXd z = preg.ldlt().solve(-problem.q);
  Eigen::VectorXd s0 = problem.h - problem.G * z;
  Eigen::VectorXd s(m), lambda(m);
  for (int i = 0; i < m; ++i) {
    s[i] = std::max(1.0, std::abs(s0[i]));
    lambda[i] = 1.0;
  }

  const double q_scale = std::max(1.0, problem.q.lpNorm<Eigen::Infinity>());
  const double h_scale = std::max(1.0, problem.h.lpNorm<Eigen::Infinity>());

  Eigen::MatrixXd kkt(n, n);
  Eigen::VectorXd r_dual(n), r_prim(m), d(m), rc(m), dz(n), ds(m), dlam(m);

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    r_dual = preg * z + problem.q + problem.G.transpose() * lambda;
    r_prim = problem.G * z + s - problem.h;
    const double mu = s.dot(lambda) / m;

    result.dual_residual = r_dual.lpNorm<Eigen::Infinity>() / q_scale;
    result.primal_residual = r_prim.lpNorm<Eigen::Infinity>() / h_scale;
    result.complementarity = mu;
    result.iterations = iter;
    if (result.dual_residual < settings.tol_feasibility &&
        result.primal_residual < settings.tol_feasibility && mu < settings.tol_gap) {
      result.status = QpStatus::kOptimal;
      break;
    }

    d = lambda.cwiseQuotient(s);
    kkt = preg;
    for (int i = 0; i < m; ++i) {
      const auto& nz = row_nnz[i];
      for (size_t a = 0; a < nz.size(); ++a) {
        const double gia = problem.G(i, nz[a]) * d[i];
        for (size_t b = a; b < nz.size(); ++b) {
          kkt(nz[a], nz[b]) += gia * problem.G(i, nz[b]);
        }
      }
    }
    Eigen::LLT<Eigen::MatrixXd, Eigen::Upper> llt(kkt);
    if (llt.info() != Eigen::Success) {
      kkt.diagonal().array() += 1e-7;
      llt.compute(kkt);
      if (llt.info() != Eigen::Success) break;
    }

    // affine predictor
    rc = s.cwiseProduct(lambda);
    Eigen::VectorXd rhs =
        -r_dual + problem.G.transpose() * (rc.cwiseQuotient(s) - d.cwiseProduct(r_prim));
    dz = llt.solve(rhs);
    ds = -r_prim - problem.G * dz;
    dlam = -(rc + lambda.cwiseProduct(ds)).cwiseQuotient(s);

    const double alpha_aff = std::min(max_step(s, ds), max_step(lambda, dlam));
    const double mu_aff = (s + alpha_aff * ds).dot(lambda + alpha_aff * dlam) / m;
    const double sigma = std::pow(mu_aff / mu, 3);

    // corrector
    rc = s.cwiseProduct(lambda) + ds.cwiseProduct(dlam);
    rc.array() -= sigma * mu;
    rhs = -r_dual + problem.G.transpose() * (rc.cwiseQuotient(s) - d.cwiseProduct(r_prim));
    dz = llt.solve(rhs);
    ds = -r_prim - problem.G * dz;
    dlam = -(rc + lambda.cwiseProduct(ds)).cwiseQuotient(s);

    const double alpha = 0.99 * std::min(max_step(s, ds), max_step(lambda, dlam));
    z += alpha * dz;
    s += alpha * ds;
    lambda += alpha * dlam;
  }

  result.z = z;
  result.lambda = lambda;
  result.slack = s;
  r_dual = preg * z + problem.q + problem.G.transpose() * lambda;
  result.dual_residual = r_dual.lpNorm<Eigen::Infinity>() / q_scale;
  result.primal_residual =
      (problem.G * z - problem.h).cwiseMax(0.0).lpNorm<Eigen::Infinity>() / h_scale;
  result.complementarity = s.dot(lambda) / m;
  return result;
}

}  // namespace pacc
