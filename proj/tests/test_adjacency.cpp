#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "slsgle/adjacency.hpp"
#include "slsgle/linalg.hpp"

using namespace slsgle;

TEST_CASE("normal_quantile matches a bisection oracle") {
  for (double prob : {1e-6, 0.01, 0.3, 0.5, 0.8, 0.975, 0.999, 1.0 - 1e-7}) {
    const double fast = normal_quantile(prob);
    const double slow = oracles::normal_quantile_bisect(prob);
    CHECK(fast == Catch::Approx(slow).margin(1e-9));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), invalid_alpha);
  CHECK_THROWS_AS(normal_quantile(1.0), invalid_alpha);
}

TEST_CASE("fisher_threshold") {
  SECTION("shrinks to zero as n grows") {
    double prev = 1.0;
    for (Eigen::Index n : {10, 100, 1000, 100000}) {
      const double r = fisher_threshold(n, 0.05, 10);
      REQUIRE(r > 0.0);
      REQUIRE(r < prev);
      prev = r;
    }
    CHECK(fisher_threshold(100000000, 0.05, 10) < 1e-3);
  }

  SECTION("formula instantiation at n = 103") {
    // sqrt(n-3) = 10, so r = tanh(z/10) with z from the Bonferroni level
    const Eigen::Index p = 10;
    const double alpha = 0.05;
    const double alpha_adj = alpha / (p * (p - 1) / 2.0);
    const double z = normal_quantile(1.0 - alpha_adj / 2.0);
    CHECK(fisher_threshold(103, alpha, p) ==
          Catch::Approx(std::tanh(z / 10.0)).epsilon(1e-12));
  }

  SECTION("numeric oracle at n=100, p=10, alpha=0.05") {
    const double z =
        oracles::normal_quantile_bisect(1.0 - 0.5 * (0.05 / 45.0));
    const double expected = std::tanh(z / std::sqrt(97.0));
    CHECK(fisher_threshold(100, 0.05, 10) ==
          Catch::Approx(expected).margin(1e-9));
  }

  SECTION("rejects bad arguments") {
    CHECK_THROWS_AS(fisher_threshold(100, 0.0, 10), invalid_alpha);
    CHECK_THROWS_AS(fisher_threshold(100, 1.0, 10), invalid_alpha);
    CHECK_THROWS_AS(fisher_threshold(3, 0.05, 10), invalid_spec);
  }
}

TEST_CASE("adjacency measures") {
  Matrix corr = Matrix::Identity(3, 3);
  corr(0, 1) = corr(1, 0) = 0.9;
  corr(0, 2) = corr(2, 0) = -0.9;
  corr(1, 2) = corr(2, 1) = 0.5;

  SECTION("identity correlation gives the zero matrix") {
    for (auto m : {AdjacencyMeasure::N1, AdjacencyMeasure::N2,
                   AdjacencyMeasure::N3, AdjacencyMeasure::N4,
                   AdjacencyMeasure::N5}) {
      AdjacencyMatrix adj =
          adjacency_from_correlation(Matrix::Identity(4, 4), m, 0.5, 2.0);
      CHECK(adj.a.cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SECTION("N1 keeps only positive exceedances, sign +1") {
    AdjacencyMatrix adj = adjacency_from_correlation(corr, AdjacencyMeasure::N1, 0.5);
    CHECK(adj.a(0, 1) == 1.0);
    CHECK(adj.a(0, 2) == 0.0);  // negative correlation ignored
    CHECK(adj.a(1, 2) == 0.0);  // at the threshold, not above
    CHECK(adj.s(0, 2) == 1.0);
  }

  SECTION("N2 thresholds |r| and keeps the sign") {
    AdjacencyMatrix adj = adjacency_from_correlation(corr, AdjacencyMeasure::N2, 0.5);
    CHECK(adj.a(0, 1) == 1.0);
    CHECK(adj.s(0, 1) == 1.0);
    CHECK(adj.a(0, 2) == 1.0);
    CHECK(adj.s(0, 2) == -1.0);
    CHECK(adj.a(1, 2) == 0.0);
  }

  SECTION("N3 powered positive part") {
    AdjacencyMatrix adj =
        adjacency_from_correlation(corr, AdjacencyMeasure::N3, 0.0, 2.0);
    CHECK(adj.a(0, 1) == Catch::Approx(0.81));
    CHECK(adj.a(0, 2) == 0.0);
    CHECK(adj.s(0, 2) == 1.0);
  }

  SECTION("N4 powered magnitude with sign") {
    AdjacencyMatrix adj =
        adjacency_from_correlation(corr, AdjacencyMeasure::N4, 0.0, 2.0);
    CHECK(adj.a(0, 2) == Catch::Approx(0.81));
    CHECK(adj.s(0, 2) == -1.0);
  }

  SECTION("N5 rational weight: r=0.5, k=2 gives 0.5") {
    AdjacencyMatrix adj =
        adjacency_from_correlation(corr, AdjacencyMeasure::N5, 0.0, 2.0);
    CHECK(adj.a(1, 2) == Catch::Approx(0.25 / 0.5));
  }

  SECTION("N5 diverges at |r| = 1") {
    Matrix perfect = Matrix::Identity(2, 2);
    perfect(0, 1) = perfect(1, 0) = 1.0;
    CHECK_THROWS_AS(
        adjacency_from_correlation(perfect, AdjacencyMeasure::N5, 0.0, 1.0),
        divergent_weight);
  }

  SECTION("parameter validation") {
    CHECK_THROWS_AS(adjacency_from_correlation(corr, AdjacencyMeasure::N1, 0.0),
                    invalid_spec);
    CHECK_THROWS_AS(
        adjacency_from_correlation(corr, AdjacencyMeasure::N3, 0.5, 0.0),
        invalid_spec);
  }
}

TEST_CASE("Fisher-thresholded N2 suppresses false edges on independent data") {
  // R sampled at n = 10^4 from independent coordinates: the Bonferroni
  // threshold should leave the adjacency empty (alpha = 0.05 family budget).
  const Eigen::Index n = 10000, p = 8;
  Matrix x = mvn_sample(Vector::Zero(p), Matrix::Identity(p, p), n, RngSeed{2024});
  Matrix corr = correlation_from_covariance(sample_covariance(x));
  const double r = fisher_threshold(n, 0.05, p);
  AdjacencyMatrix adj = adjacency_from_correlation(corr, AdjacencyMeasure::N2, r);
  CHECK(adj.a.cwiseAbs().maxCoeff() == 0.0);
}
