#pragma once

#include <cmath>
#include <string>

#include "slsgle/glasso.hpp"
#include "slsgle/linalg.hpp"

namespace slsgle {

// Standard normal CDF.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

// Inverse standard normal CDF: Acklam's rational approximation followed by
// one Halley step against erfc, good to machine precision.
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw invalid_alpha("normal_quantile: probability must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double err = normal_cdf(x) - prob;
  const double u = err * 2.5066282746310002 * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Correlation threshold from the Fisher z transformation, Bonferroni
// corrected over all p(p-1)/2 pairs, two-sided at level alpha:
//   r = tanh( z_{1 - alpha'/2} / sqrt(n-3) ).
inline double fisher_threshold(Eigen::Index n, double alpha, Eigen::Index p) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw invalid_alpha("fisher_threshold: alpha must be in (0,1)");
  if (n < 4) throw invalid_spec("fisher_threshold: need n >= 4");
  if (p < 2) throw invalid_spec("fisher_threshold: need p >= 2");
  const double pairs = 0.5 * static_cast<double>(p) * static_cast<double>(p - 1);
  const double alpha_adj = alpha / pairs;
  const double z = normal_quantile(1.0 - 0.5 * alpha_adj);
  return std::tanh(z / std::sqrt(static_cast<double>(n - 3)));
}

enum class AdjacencyMeasure { N1, N2, N3, N4, N5, Precision };

inline std::string measure_name(AdjacencyMeasure m) {
  switch (m) {
    case AdjacencyMeasure::N1: return "N1";
    case AdjacencyMeasure::N2: return "N2";
    case AdjacencyMeasure::N3: return "N3";
    case AdjacencyMeasure::N4: return "N4";
    case AdjacencyMeasure::N5: return "N5";
    case AdjacencyMeasure::Precision: return "PRECISION";
  }
  return "?";
}

// Edge weights a (symmetric, zero diagonal) and signs s in {-1,+1}.
struct AdjacencyMatrix {
  Matrix a;
  Matrix s;
  AdjacencyMeasure measure_id = AdjacencyMeasure::N2;
};

// The five correlation-based adjacency measures. r is the hard threshold for
// N1/N2, k the power for N3-N5.
inline AdjacencyMatrix adjacency_from_correlation(const Matrix& corr,
                                                  AdjacencyMeasure measure,
                                                  double r = 0.0,
                                                  double k = 1.0) {
  const auto p = corr.rows();
  if (corr.cols() != p)
    throw dimension_mismatch("adjacency_from_correlation: square matrix required");
  if (!is_symmetric(corr, 1e-12))
    throw invalid_spec("adjacency_from_correlation: correlation must be symmetric");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::abs(corr(j, j) - 1.0) > 1e-10)
      throw invalid_spec("adjacency_from_correlation: diagonal must be 1");
    for (Eigen::Index l = 0; l < p; ++l)
      if (std::abs(corr(j, l)) > 1.0 + 1e-12)
        throw invalid_spec("adjacency_from_correlation: entries must be in [-1,1]");
  }
  const bool thresholded =
      measure == AdjacencyMeasure::N1 || measure == AdjacencyMeasure::N2;
  if (thresholded && !(r > 0.0 && r < 1.0))
    throw invalid_spec("adjacency_from_correlation: threshold r must be in (0,1)");
  if (!thresholded && !(k > 0.0))
    throw invalid_spec("adjacency_from_correlation: power k must be > 0");

  AdjacencyMatrix adj;
  adj.measure_id = measure;
  adj.a = Matrix::Zero(p, p);
  adj.s = Matrix::Ones(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index l = j + 1; l < p; ++l) {
      const double rho = corr(j, l);
      const double mag = std::abs(rho);
      double weight = 0.0;
      double sign = 1.0;
      switch (measure) {
        case AdjacencyMeasure::N1:
          weight = rho > r ? 1.0 : 0.0;
          break;
        case AdjacencyMeasure::N2:
          weight = mag > r ? 1.0 : 0.0;
          sign = rho < 0.0 ? -1.0 : 1.0;
          break;
        case AdjacencyMeasure::N3:
          weight = std::pow(std::max(0.0, rho), k);
          break;
        case AdjacencyMeasure::N4:
          weight = std::pow(mag, k);
          sign = rho < 0.0 ? -1.0 : 1.0;
          break;
        case AdjacencyMeasure::N5:
          if (mag >= 1.0)
            throw divergent_weight(
                "adjacency_from_correlation: |r| = 1 off-diagonal under N5");
          weight = std::pow(mag, k) / (1.0 - mag);
          sign = rho < 0.0 ? -1.0 : 1.0;
          break;
        case AdjacencyMeasure::Precision:
          throw invalid_spec(
              "adjacency_from_correlation: PRECISION is not a correlation measure");
      }
      adj.a(j, l) = weight;
      adj.a(l, j) = weight;
      adj.s(j, l) = sign;
      adj.s(l, j) = sign;
    }
  }
  return adj;
}

}  // namespace slsgle
