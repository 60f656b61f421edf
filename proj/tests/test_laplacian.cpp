#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "slsgle/adjacency.hpp"
#include "slsgle/glasso.hpp"
#include "slsgle/laplacian.hpp"

using namespace slsgle;

namespace {

// Pairwise-difference form the Laplacian quadratic must reproduce.
double pairwise_quadratic(const Matrix& weights, const Matrix& signs,
                          const Vector& beta) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < weights.rows(); ++j)
    for (Eigen::Index k = j + 1; k < weights.cols(); ++k) {
      const double diff = beta[j] - signs(j, k) * beta[k];
      total += std::abs(weights(j, k)) * diff * diff;
    }
  return total;
}

PrecisionEstimate wrap_theta(const Matrix& theta) {
  PrecisionEstimate est;
  est.theta = theta;
  return est;
}

}  // namespace

TEST_CASE("laplacian from a diagonal precision is zero") {
  Matrix theta = Matrix::Zero(3, 3);
  theta.diagonal() << 1.0, 2.0, 0.5;
  LaplacianMatrix lap = laplacian_build(wrap_theta(theta));
  CHECK(lap.gamma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian hand computation") {
  Matrix theta(2, 2);
  theta << 1.0, 0.5, 0.5, 1.0;
  LaplacianMatrix lap = laplacian_build(wrap_theta(theta));
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((lap.gamma - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic-form identity for precision sources") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 100; ++rep) {
    // random sparse symmetric theta with dominant diagonal
    const Eigen::Index p = 3 + static_cast<Eigen::Index>(unif(gen) * 10);
    Matrix theta = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      theta(i, i) = 1.0 + unif(gen);
      for (Eigen::Index j = i + 1; j < p; ++j)
        if (unif(gen) < 0.4) {
          theta(i, j) = nd(gen) * 0.4;
          theta(j, i) = theta(i, j);
        }
    }
    LaplacianMatrix lap = laplacian_build(wrap_theta(theta));
    Matrix signs(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j)
        signs(i, j) = theta(i, j) < 0.0 ? -1.0 : 1.0;
    Vector beta(p);
    for (Eigen::Index i = 0; i < p; ++i) beta[i] = nd(gen);
    const double direct = beta.dot(lap.gamma * beta);
    const double pairwise = pairwise_quadratic(theta, signs, beta);
    REQUIRE(std::abs(direct - pairwise) <= 1e-10 * std::max(1.0, std::abs(direct)));
    REQUIRE(min_eigenvalue(lap.gamma) >= -psd_tolerance(lap.gamma));
  }
}

TEST_CASE("quadratic-form identity for adjacency sources") {
  std::mt19937_64 gen(43);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index p = 4 + static_cast<Eigen::Index>(unif(gen) * 6);
    Matrix corr = Matrix::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j) {
        corr(i, j) = std::clamp(nd(gen) * 0.4, -0.95, 0.95);
        corr(j, i) = corr(i, j);
      }
    AdjacencyMatrix adj =
        adjacency_from_correlation(corr, AdjacencyMeasure::N4, 0.0, 1.5);
    LaplacianMatrix lap = laplacian_build(adj);
    Vector beta(p);
    for (Eigen::Index i = 0; i < p; ++i) beta[i] = nd(gen);
    const double direct = beta.dot(lap.gamma * beta);
    const double pairwise = pairwise_quadratic(adj.a, adj.s, beta);
    REQUIRE(std::abs(direct - pairwise) <= 1e-10 * std::max(1.0, std::abs(direct)));
    REQUIRE(min_eigenvalue(lap.gamma) >= -psd_tolerance(lap.gamma));
  }
}

TEST_CASE("laplacian derived from a glasso fit keeps the identity") {
  std::mt19937_64 gen(7);
  Matrix sigma = oracles::random_spd(8, gen, 0.3);
  GlassoConfig cfg;
  cfg.lambda0 = 0.1;
  cfg.tol = 1e-7;
  PrecisionEstimate est = glasso_fit(sigma, cfg);
  LaplacianMatrix lap = laplacian_build(est);
  std::normal_distribution<double> nd;
  Matrix signs(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j)
      signs(i, j) = est.theta(i, j) < 0.0 ? -1.0 : 1.0;
  for (int rep = 0; rep < 20; ++rep) {
    Vector beta(8);
    for (Eigen::Index i = 0; i < 8; ++i) beta[i] = nd(gen);
    const double direct = beta.dot(lap.gamma * beta);
    const double pairwise = pairwise_quadratic(est.theta, signs, beta);
    REQUIRE(std::abs(direct - pairwise) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("malformed adjacency is rejected") {
  AdjacencyMatrix adj;
  adj.a = Matrix::Zero(2, 2);
  adj.s = Matrix::Ones(2, 2);
  adj.a(0, 1) = 1.0;  // asymmetric weight
  CHECK_THROWS_AS(laplacian_build(adj), not_psd);

  adj.a(1, 0) = 1.0;
  adj.a(0, 0) = 0.5;  // nonzero diagonal
  CHECK_THROWS_AS(laplacian_build(adj), not_psd);
}

TEST_CASE("identity and zero penalty kernels") {
  CHECK(identity_penalty(3).gamma == Matrix::Identity(3, 3));
  CHECK(zero_penalty(3).gamma == Matrix::Zero(3, 3));
  CHECK(identity_penalty(3).source == PenaltySource::Identity);
}
