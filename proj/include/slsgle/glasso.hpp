#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "slsgle/linalg.hpp"

namespace slsgle {

struct GlassoConfig {
  double lambda0 = 0.1;
  int max_sweeps = 200;
  double tol = 1e-5;  // exit gate on both entry change and KKT residual
  bool penalize_diagonal = false;
};

// Estimated inverse covariance with its sparsity pattern (the graph).
struct PrecisionEstimate {
  Matrix theta;  // strictly positive definite
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edge_set;  // j < j', theta != 0
  double lambda0 = 0.0;
  bool converged = false;
  int sweeps_used = 0;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;  // objective after each sweep
};

// -log|Theta| + tr(Theta Sigma) + lambda0 * l1(Theta), l1 over the
// off-diagonal only unless cfg.penalize_diagonal.
inline double glasso_objective(const Matrix& sigma_hat, const Matrix& theta,
                               const GlassoConfig& cfg) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success)
    throw not_psd("glasso_objective: theta not positive definite");
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < theta.rows(); ++j)
    logdet += 2.0 * std::log(llt.matrixLLT()(j, j));
  double l1 = theta.cwiseAbs().sum() - theta.diagonal().cwiseAbs().sum();
  if (cfg.penalize_diagonal) l1 += theta.diagonal().cwiseAbs().sum();
  return -logdet + (sigma_hat * theta).trace() + cfg.lambda0 * l1;
}

// Max stationarity violation of the subgradient conditions at theta:
// W = Theta^{-1} must satisfy sigma - W + lambda0 * dl1 = 0 entrywise.
inline double glasso_kkt_residual(const Matrix& sigma_hat,
                                  const Matrix& theta,
                                  const GlassoConfig& cfg) {
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success)
    throw not_psd("glasso_kkt_residual: theta not positive definite");
  Matrix w = llt.solve(Matrix::Identity(theta.rows(), theta.cols()));
  const double lam = cfg.lambda0;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.rows(); ++j) {
    for (Eigen::Index k = 0; k < theta.cols(); ++k) {
      const double grad = sigma_hat(j, k) - w(j, k);
      double viol;
      if (j == k) {
        // theta_jj > 0 for PD theta, so the subgradient is +lam when penalized
        viol = cfg.penalize_diagonal ? std::abs(grad + lam) : std::abs(grad);
      } else if (theta(j, k) != 0.0) {
        viol = std::abs(grad + lam * (theta(j, k) > 0.0 ? 1.0 : -1.0));
      } else {
        viol = std::max(0.0, std::abs(grad) - lam);
      }
      worst = std::max(worst, viol);
    }
  }
  return worst;
}

inline double glasso_kkt_residual(const Matrix& sigma_hat,
                                  const PrecisionEstimate& est,
                                  const GlassoConfig& cfg) {
  return glasso_kkt_residual(sigma_hat, est.theta, cfg);
}

namespace detail {

// Lasso subproblem for one column:
//   min_a 1/2 a^T K a + s^T a + lam ||a||_1,
// coordinate descent warm-started at `a`, gradient K a maintained.
inline void glasso_column_lasso(const Matrix& k_mat, const Vector& s,
                                double lam, Vector& a, double inner_tol,
                                int max_inner) {
  const auto m = a.size();
  Vector grad = k_mat * a;
  for (int pass = 0; pass < max_inner; ++pass) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double kii = k_mat(i, i);
      if (kii <= 0.0) {
        a[i] = 0.0;
        continue;
      }
      const double resid = kii * a[i] - grad[i] - s[i];
      const double updated = soft_threshold(resid, lam) / kii;
      const double delta = updated - a[i];
      if (delta != 0.0) {
        grad += k_mat.col(i) * delta;
        a[i] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < inner_tol) break;
  }
}

}  // namespace detail

// Graphical lasso, Gaussian log-likelihood with entrywise l1:
//   min over Theta of  -log|Theta| + tr(Theta Sigma) + lambda0 l1(Theta).
//
// Block coordinate descent over columns on the primal variable: for each
// column the off-diagonal block solves a lasso with kernel Theta11^{-1} and
// the diagonal entry has a closed form. W = Theta^{-1} is carried along so
// Theta11^{-1} is one rank-1 correction away. Exact block minimization makes
// the objective non-increasing every sweep, and soft-thresholding leaves
// exact zeros for the edge set.
inline PrecisionEstimate glasso_fit(const Matrix& sigma_hat,
                                    const GlassoConfig& cfg) {
  require_psd(sigma_hat, "glasso_fit");
  const auto p = sigma_hat.rows();
  const double lam = cfg.lambda0;
  if (lam < 0.0) throw invalid_spec("glasso_fit: lambda0 must be >= 0");
  for (Eigen::Index j = 0; j < p; ++j)
    if (sigma_hat(j, j) <= 0.0)
      throw not_psd("glasso_fit: nonpositive variance on diagonal");

  const double diag_pen = cfg.penalize_diagonal ? lam : 0.0;
  Matrix theta = Matrix::Zero(p, p);
  Matrix w = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    w(j, j) = sigma_hat(j, j) + diag_pen;
    theta(j, j) = 1.0 / w(j, j);
  }

  PrecisionEstimate est;
  est.lambda0 = lam;
  if (p == 1) {
    est.theta = theta;
    est.converged = true;
    est.kkt_residual = glasso_kkt_residual(sigma_hat, theta, cfg);
    est.objective_trace.push_back(glasso_objective(sigma_hat, theta, cfg));
    return est;
  }

  const double inner_tol = std::max(1e-13, 1e-3 * cfg.tol);
  std::vector<Eigen::Index> rest(p - 1);

  Matrix theta11_inv(p - 1, p - 1);
  Vector s12(p - 1), a(p - 1), u(p - 1);
  double change = 0.0;
  int sweep = 0;
  for (; sweep < cfg.max_sweeps; ++sweep) {
    Matrix theta_prev = theta;
    for (Eigen::Index j = 0; j < p; ++j) {
      Eigen::Index r = 0;
      for (Eigen::Index k = 0; k < p; ++k)
        if (k != j) rest[r++] = k;

      const double w22 = w(j, j);
      for (Eigen::Index ri = 0; ri < p - 1; ++ri) {
        const Eigen::Index i = rest[ri];
        s12[ri] = sigma_hat(i, j);
        a[ri] = theta(i, j);
        for (Eigen::Index rk = ri; rk < p - 1; ++rk) {
          const Eigen::Index k = rest[rk];
          const double v = w(i, k) - w(i, j) * w(k, j) / w22;
          theta11_inv(ri, rk) = v;
          theta11_inv(rk, ri) = v;
        }
      }

      const double cap = sigma_hat(j, j) + diag_pen;
      Matrix k_mat = cap * theta11_inv;
      detail::glasso_column_lasso(k_mat, s12, lam, a, inner_tol, 1000);

      u = theta11_inv * a;  // Theta11^{-1} theta12
      const double theta22 = a.dot(u) + 1.0 / cap;
      for (Eigen::Index ri = 0; ri < p - 1; ++ri) {
        theta(rest[ri], j) = a[ri];
        theta(j, rest[ri]) = a[ri];
      }
      theta(j, j) = theta22;

      // Refresh W = Theta^{-1}: Schur complement of the updated column is
      // 1/cap by construction.
      w(j, j) = cap;
      for (Eigen::Index ri = 0; ri < p - 1; ++ri) {
        const double wij = -u[ri] * cap;
        w(rest[ri], j) = wij;
        w(j, rest[ri]) = wij;
      }
      for (Eigen::Index ri = 0; ri < p - 1; ++ri)
        for (Eigen::Index rk = ri; rk < p - 1; ++rk) {
          const double v = theta11_inv(ri, rk) + u[ri] * u[rk] * cap;
          w(rest[ri], rest[rk]) = v;
          w(rest[rk], rest[ri]) = v;
        }
    }

    est.objective_trace.push_back(glasso_objective(sigma_hat, theta, cfg));
    const double scale = std::max(theta.cwiseAbs().maxCoeff(), 1e-12);
    change = (theta - theta_prev).cwiseAbs().maxCoeff() / scale;
    if (change < cfg.tol) {
      est.kkt_residual = glasso_kkt_residual(sigma_hat, theta, cfg);
      if (est.kkt_residual <= cfg.tol) {
        est.converged = true;
        ++sweep;
        break;
      }
    }
  }
  est.sweeps_used = sweep;
  if (!est.converged)
    est.kkt_residual = glasso_kkt_residual(sigma_hat, theta, cfg);
  est.theta = std::move(theta);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = j + 1; k < p; ++k)
      if (est.theta(j, k) != 0.0) est.edge_set.emplace_back(j, k);
  return est;
}

// 10 log-spaced penalties in [0.01, 1] * max |off-diagonal of sigma_hat|.
inline std::vector<double> default_lambda0_grid(const Matrix& sigma_hat,
                                                int count = 10) {
  double max_off = 0.0;
  for (Eigen::Index j = 0; j < sigma_hat.rows(); ++j)
    for (Eigen::Index k = 0; k < sigma_hat.cols(); ++k)
      if (j != k) max_off = std::max(max_off, std::abs(sigma_hat(j, k)));
  if (max_off <= 0.0) max_off = 1.0;
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = 0.1 * max_off;
    return grid;
  }
  const double lo = std::log(0.01), hi = std::log(1.0);
  for (int i = 0; i < count; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    grid[i] = std::exp(t) * max_off;
  }
  return grid;
}

}  // namespace slsgle
