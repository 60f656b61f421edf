#pragma once

#include "slsgle/adjacency.hpp"
#include "slsgle/glasso.hpp"
#include "slsgle/linalg.hpp"

namespace slsgle {

enum class PenaltySource { Precision, Adjacency, Identity, Zero, Custom };

// Graph Laplacian penalty kernel. For Precision/Adjacency sources the
// quadratic form satisfies
//   beta^T Gamma beta = sum_{j<j'} |a_jj'| (beta_j - s_jj' beta_j')^2,
// hence Gamma is PSD. Identity is the elastic-net kernel, Zero plain lasso.
struct LaplacianMatrix {
  Matrix gamma;
  PenaltySource source = PenaltySource::Custom;
};

// Gamma = D - Theta with d_j = sum_j' |theta_jj'| (the j'=j term included,
// so the diagonal of Gamma is the off-diagonal absolute row sum).
inline LaplacianMatrix laplacian_build(const PrecisionEstimate& est) {
  const auto p = est.theta.rows();
  if (est.theta.cols() != p)
    throw dimension_mismatch("laplacian_build: theta must be square");
  LaplacianMatrix lap;
  lap.source = PenaltySource::Precision;
  lap.gamma = -est.theta;
  for (Eigen::Index j = 0; j < p; ++j)
    lap.gamma(j, j) = est.theta.row(j).cwiseAbs().sum() - est.theta(j, j);
  require_psd(lap.gamma, "laplacian_build(precision)");
  return lap;
}

// Gamma = D - A with d_j = sum_j' |a_jj'| and the off-diagonal of "A"
// carrying the signed weights s_jj' |a_jj'|.
inline LaplacianMatrix laplacian_build(const AdjacencyMatrix& adj) {
  const auto p = adj.a.rows();
  if (adj.a.cols() != p || adj.s.rows() != p || adj.s.cols() != p)
    throw dimension_mismatch("laplacian_build: adjacency blocks must be square");
  if (!is_symmetric(adj.a, 0.0) || !is_symmetric(adj.s, 0.0))
    throw not_psd("laplacian_build: malformed signed adjacency (asymmetric)");
  for (Eigen::Index j = 0; j < p; ++j)
    if (adj.a(j, j) != 0.0)
      throw not_psd("laplacian_build: adjacency diagonal must be zero");
  LaplacianMatrix lap;
  lap.source = PenaltySource::Adjacency;
  lap.gamma = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double degree = 0.0;
    for (Eigen::Index l = 0; l < p; ++l) {
      if (l == j) continue;
      const double weight = std::abs(adj.a(j, l));
      degree += weight;
      const double sign = adj.s(j, l) < 0.0 ? -1.0 : 1.0;
      lap.gamma(j, l) = -sign * weight;
    }
    lap.gamma(j, j) = degree;
  }
  require_psd(lap.gamma, "laplacian_build(adjacency)");
  return lap;
}

inline LaplacianMatrix identity_penalty(Eigen::Index p) {
  return LaplacianMatrix{Matrix::Identity(p, p), PenaltySource::Identity};
}

inline LaplacianMatrix zero_penalty(Eigen::Index p) {
  return LaplacianMatrix{Matrix::Zero(p, p), PenaltySource::Zero};
}

}  // namespace slsgle
