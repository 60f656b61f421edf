#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "slsgle/io.hpp"
#include "slsgle/simlab.hpp"

using namespace slsgle;

TEST_CASE("scenario covariances") {
  SECTION("EX1 is block diagonal with power-decay blocks") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX1;
    spec.p = 10;
    ScenarioCovariance cov = scenario_covariance(spec);
    CHECK(cov.sigma(0, 5) == 0.0);
    CHECK(cov.sigma(0, 1) == Catch::Approx(0.8));
    CHECK(cov.sigma(0, 4) == Catch::Approx(std::pow(0.8, 4)));
    CHECK(cov.sigma(6, 8) == Catch::Approx(0.64));
    CHECK(cov.sigma.diagonal().isOnes());
    CHECK(min_eigenvalue(cov.sigma) > 0.0);
    CHECK_FALSE(cov.has_theta);
  }

  SECTION("EX2 decays globally") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX2;
    spec.p = 12;
    ScenarioCovariance cov = scenario_covariance(spec);
    CHECK(cov.sigma(0, 11) == Catch::Approx(std::pow(0.8, 11)));
    CHECK(min_eigenvalue(cov.sigma) > 0.0);
  }

  SECTION("EX3 block tridiagonal precision is positive definite") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX3;
    spec.p = 5;
    spec.q = 2;
    ScenarioCovariance cov = scenario_covariance(spec);
    REQUIRE(cov.has_theta);
    // tridiagonal Toeplitz spectrum: 1 + cos(k pi / 6)
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov.theta_true, Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < 5; ++k) {
      const double expected = 1.0 + std::cos((5 - k) * M_PI / 6.0);
      CHECK(es.eigenvalues()[k] == Catch::Approx(expected).margin(1e-12));
    }
    CHECK(min_eigenvalue(cov.sigma) > 0.0);
    CHECK((cov.sigma * cov.theta_true - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <
          1e-12);
  }

  SECTION("EX4 hits the target condition number with unit diagonal") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX4;
    spec.p = 60;
    ScenarioCovariance cov = scenario_covariance(spec);
    REQUIRE(cov.has_theta);
    for (Eigen::Index j = 0; j < 60; ++j)
      REQUIRE(std::abs(cov.theta_true(j, j) - 1.0) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov.theta_true, Eigen::EigenvaluesOnly);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(std::abs(cond - 60.0) / 60.0 < 0.01);
    CHECK(min_eigenvalue(cov.sigma) > 0.0);

    ScenarioSpec again = spec;  // structure seed fixed => same graph
    CHECK((scenario_covariance(again).theta_true - cov.theta_true)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SECTION("FIG1 requires p = 20") {
    ScenarioSpec spec;
    spec.id = ScenarioId::FIG1;
    spec.p = 25;
    CHECK_THROWS_AS(scenario_covariance(spec), invalid_spec);
  }

  SECTION("EX1/EX3 require p divisible by 5") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX1;
    spec.p = 7;
    CHECK_THROWS_AS(scenario_covariance(spec), invalid_spec);
    spec.id = ScenarioId::EX3;
    CHECK_THROWS_AS(scenario_covariance(spec), invalid_spec);
  }
}

TEST_CASE("generate_dataset") {
  SECTION("zero noise, zero support gives the zero response") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX2;
    spec.p = 8;
    spec.q = 0;
    spec.noise_sd = 0.0;
    spec.n = 15;
    Dataset ds = generate_dataset(spec);
    CHECK(ds.y.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ds.beta_true.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("same seed, same data") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX3;
    spec.p = 10;
    spec.q = 4;
    spec.n = 25;
    spec.seed = RngSeed{777};
    Dataset a = generate_dataset(spec);
    Dataset b = generate_dataset(spec);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("beta placement on the first q coordinates") {
    ScenarioSpec spec;
    spec.id = ScenarioId::EX1;
    spec.p = 15;
    spec.q = 6;
    spec.n = 20;
    Dataset ds = generate_dataset(spec);
    for (Eigen::Index j = 0; j < 15; ++j)
      CHECK(ds.beta_true[j] == (j < 6 ? 1.5 : 0.0));
  }
}

TEST_CASE("compute_metrics") {
  SECTION("perfect estimate on a noiseless test set") {
    Matrix x_test = Matrix::Identity(4, 4);
    Vector beta(4);
    beta << 1, -2, 0, 3;
    Metrics m = compute_metrics(beta, beta, x_test * beta, x_test);
    CHECK(m.l2_error == 0.0);
    CHECK(m.mse == 0.0);
  }

  SECTION("null estimate scores the signal energy") {
    Vector beta_true = Vector::Zero(9);
    for (Eigen::Index j = 0; j < 4; ++j) beta_true[j] = 1.5;
    Metrics m = compute_metrics(Vector::Zero(9), beta_true, Vector::Zero(3),
                                Matrix::Zero(3, 9));
    CHECK(m.l2_error == Catch::Approx(1.5 * 2.0));  // 1.5 sqrt(4)
  }

  SECTION("hand-computed three-dimensional case") {
    Vector beta_hat(3), beta_true(3);
    beta_hat << 1.0, 0.0, 2.0;
    beta_true << 0.0, 0.0, 4.0;
    Matrix x_test(2, 3);
    x_test << 1, 0, 0, 0, 0, 1;
    Vector y_test(2);
    y_test << 3.0, 1.0;
    Metrics m = compute_metrics(beta_hat, beta_true, y_test, x_test);
    CHECK(m.l2_error == Catch::Approx(std::sqrt(1.0 + 4.0)));
    // predictions (1, 2): errors (2, -1) -> mse = (4 + 1)/2
    CHECK(m.mse == Catch::Approx(2.5));
  }
}

TEST_CASE("EX3 graph is recoverable by glasso at small lambda0") {
  // n=500, p=20: >= 90% true edges found, <= 10% false edges, over 10 seeds
  const Eigen::Index p = 20;
  ScenarioSpec spec;
  spec.id = ScenarioId::EX3;
  spec.p = p;
  spec.n = 500;
  ScenarioCovariance cov = scenario_covariance(spec);
  std::set<std::pair<Eigen::Index, Eigen::Index>> truth;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j)
      if (cov.theta_true(i, j) != 0.0) truth.insert({i, j});

  double tpr_sum = 0.0, fpr_sum = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    spec.seed = RngSeed{9000 + static_cast<std::uint64_t>(rep)};
    Dataset ds = generate_dataset(spec);
    Matrix sigma_hat = sample_covariance(standardize_columns(ds.x));
    GlassoConfig cfg;
    cfg.lambda0 = 0.15;
    PrecisionEstimate est = glasso_fit(sigma_hat, cfg);
    int tp = 0, fp = 0;
    for (const auto& e : est.edge_set)
      if (truth.count(e))
        ++tp;
      else
        ++fp;
    tpr_sum += static_cast<double>(tp) / truth.size();
    const double negatives = p * (p - 1) / 2.0 - truth.size();
    fpr_sum += static_cast<double>(fp) / negatives;
  }
  CHECK(tpr_sum / 10.0 >= 0.9);
  CHECK(fpr_sum / 10.0 <= 0.1);
}

TEST_CASE("run_study") {
  StudyConfig cfg;
  cfg.base.id = ScenarioId::EX3;
  cfg.base.p = 20;
  cfg.base.q = 5;
  cfg.n_list = {40};
  cfg.replications = 2;
  cfg.seed = RngSeed{11};
  cfg.lambda0_grid = {0.2};
  cfg.lambda1_count = 12;
  cfg.lambda2_grid = {0.1, 1.0};
  cfg.test_size = 50;

  SECTION("one cell produces one row") {
    StudyConfig tiny = cfg;
    tiny.replications = 1;
    tiny.methods = {Method::SlsGle};
    StudyResult res = run_study(tiny);
    REQUIRE(res.results.size() == 1);
    CHECK(res.failures.empty());
    CHECK(res.results[0].method == "SLS-GLE");
    CHECK(res.results[0].n == 40);
  }

  SECTION("lasso reduction: zero lambda2 grid reproduces the lasso method") {
    StudyConfig a = cfg;
    a.methods = {Method::Lasso};
    StudyConfig b = cfg;
    b.methods = {Method::SlsGle};
    b.lambda2_grid = {0.0};
    StudyResult ra = run_study(a);
    StudyResult rb = run_study(b);
    REQUIRE(ra.results.size() == rb.results.size());
    for (std::size_t i = 0; i < ra.results.size(); ++i)
      CHECK(ra.results[i].l2_error ==
            Catch::Approx(rb.results[i].l2_error).epsilon(1e-12));
  }

  SECTION("study is deterministic, thread-count invariant, and summarizable") {
    StudyConfig par = cfg;
    par.methods = {Method::SlsGle, Method::Lasso, Method::SlsN2};
    par.threads = 2;
    StudyConfig seq = par;
    seq.threads = 1;
    StudyResult rp = run_study(par);
    StudyResult rs = run_study(seq);
    REQUIRE(rp.results.size() == rs.results.size());
    std::ostringstream bytes_p, bytes_s;
    summary_to_csv(bytes_p, summarize_results(rp.results));
    summary_to_csv(bytes_s, summarize_results(rs.results));
    CHECK(bytes_p.str() == bytes_s.str());

    std::vector<MetricsSummary> summary = summarize_results(rp.results);
    REQUIRE(summary.size() == 3);
    for (const MetricsSummary& s : summary) {
      CHECK(s.replicates == 2);
      CHECK(s.l2_mean > 0.0);
    }
  }

  SECTION("elastic net and adjacency methods run end to end") {
    StudyConfig mix = cfg;
    mix.replications = 1;
    mix.methods = {Method::ElasticNet, Method::SlsN4, Method::SlsN5};
    StudyResult res = run_study(mix);
    CHECK(res.results.size() == 3);
    CHECK(res.failures.empty());
  }
}
