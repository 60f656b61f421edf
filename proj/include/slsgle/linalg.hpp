#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>

#include "slsgle/errors.hpp"
#include "slsgle/rng.hpp"

namespace slsgle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Soft threshold S(a, b) = sign(a) (|a| - b)_+, the l1 proximal map.
inline double soft_threshold(double a, double b) {
  const double mag = std::abs(a) - b;
  if (mag <= 0.0) return 0.0;
  return a > 0.0 ? mag : -mag;
}

// PSD tolerance: smallest eigenvalue may dip to -1e-8 * max |entry|.
inline double psd_tolerance(const Matrix& m) {
  const double scale = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(scale, 1.0);
}

inline bool is_symmetric(const Matrix& m, double tol = 0.0) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline void require_psd(const Matrix& m, const std::string& what) {
  if (!is_symmetric(m, psd_tolerance(m)))
    throw not_psd(what + ": matrix is not symmetric");
  if (min_eigenvalue(0.5 * (m + m.transpose())) < -psd_tolerance(m))
    throw not_psd(what + ": smallest eigenvalue below -tol_psd");
}

// Per-column centering/scaling state, kept so coefficients fitted on
// standardized data can be mapped back to the raw scale.
struct StandardizationParams {
  Vector means;   // column means
  Vector scales;  // sqrt((1/n) sum (x - mean)^2), the population RMS
};

// Center each column to mean 0 and scale so (1/n) sum x_ij^2 = 1.
inline Matrix standardize_columns(const Matrix& x, StandardizationParams* params = nullptr) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (n < 2) throw dimension_mismatch("standardize_columns: need n >= 2");
  Matrix out(n, p);
  Vector means(p), scales(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = x.col(j).mean();
    Vector centered = x.col(j).array() - mean;
    const double scale = std::sqrt(centered.squaredNorm() / static_cast<double>(n));
    const double col_mag = x.col(j).cwiseAbs().maxCoeff();
    if (scale <= 1e-14 * std::max(1.0, col_mag))
      throw constant_column(static_cast<std::size_t>(j));
    out.col(j) = centered / scale;
    means[j] = mean;
    scales[j] = scale;
  }
  if (params) {
    params->means = std::move(means);
    params->scales = std::move(scales);
  }
  return out;
}

// Sample covariance with 1/n divisor: keeps diag = 1 exactly on standardized
// columns, matching the (1/n) sum x^2 = 1 normalization.
inline Matrix sample_covariance(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) throw dimension_mismatch("sample_covariance: need n >= 2");
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix sigma = (centered.transpose() * centered) / static_cast<double>(n);
  sigma = 0.5 * (sigma + sigma.transpose());  // exact symmetry
  return sigma;
}

// Correlation matrix from a covariance (unit diagonal, entries in [-1,1]).
inline Matrix correlation_from_covariance(const Matrix& sigma) {
  const auto p = sigma.rows();
  Vector inv_sd(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double v = sigma(j, j);
    if (v <= 0.0)
      throw constant_column(static_cast<std::size_t>(j));
    inv_sd[j] = 1.0 / std::sqrt(v);
  }
  Matrix r = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
  for (Eigen::Index j = 0; j < p; ++j) r(j, j) = 1.0;
  return 0.5 * (r + r.transpose());
}

// Factor L with L^T L = M, for M PSD within tolerance. Cholesky when strictly
// positive definite, symmetric eigendecomposition with negative eigenvalues
// clipped to zero otherwise (Laplacians are always singular).
inline Matrix chol_or_eigh_factor(const Matrix& m) {
  require_psd(m, "chol_or_eigh_factor");
  Matrix sym = 0.5 * (m + m.transpose());
  const double recon_tol =
      1e-8 * std::max(1.0, sym.size() > 0 ? sym.cwiseAbs().maxCoeff() : 0.0);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    Matrix u = llt.matrixU();  // U^T U = L L^T = M
    if (u.allFinite() &&
        (u.transpose() * u - sym).cwiseAbs().maxCoeff() <= recon_tol)
      return u;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw not_psd("chol_or_eigh_factor: eigendecomposition failed");
  Vector sqrt_eigs = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  // L = sqrt(Lambda) Q^T so that L^T L = Q Lambda_+ Q^T.
  Matrix factor = sqrt_eigs.asDiagonal() * es.eigenvectors().transpose();
  // An exactly-zero diagonal entry forces an exactly-zero factor column.
  for (Eigen::Index j = 0; j < sym.cols(); ++j)
    if (sym(j, j) == 0.0) factor.col(j).setZero();
  return factor;
}

// n i.i.d. rows from N_p(mean, cov), via X = mean + Z L with L^T L = cov.
inline Matrix mvn_sample(const Vector& mean, const Matrix& cov, Eigen::Index n,
                         RngSeed seed) {
  if (mean.size() != cov.rows() || cov.rows() != cov.cols())
    throw dimension_mismatch("mvn_sample: mean/cov dimensions disagree");
  Matrix factor = chol_or_eigh_factor(cov);  // throws not_psd on bad cov
  const auto p = mean.size();
  Rng rng(seed);
  Matrix z(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  Matrix x = z * factor;
  x.rowwise() += mean.transpose();
  return x;
}

}  // namespace slsgle
