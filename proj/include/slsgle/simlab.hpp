#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "slsgle/adjacency.hpp"
#include "slsgle/glasso.hpp"
#include "slsgle/laplacian.hpp"
#include "slsgle/linalg.hpp"
#include "slsgle/model_selection.hpp"
#include "slsgle/rng.hpp"
#include "slsgle/solver.hpp"

namespace slsgle {

enum class ScenarioId { EX1, EX2, EX3, EX4, FIG1 };

inline std::string scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::EX1: return "EX1";
    case ScenarioId::EX2: return "EX2";
    case ScenarioId::EX3: return "EX3";
    case ScenarioId::EX4: return "EX4";
    case ScenarioId::FIG1: return "FIG1";
  }
  return "?";
}

struct ScenarioSpec {
  ScenarioId id = ScenarioId::EX3;
  Eigen::Index n = 100;
  Eigen::Index p = 60;
  Eigen::Index q = 10;
  double beta_value = 1.5;
  double noise_sd = 1.0;
  RngSeed seed{0};
  // EX4's random graph is part of the design, not of the data draw, so it
  // has its own seed and stays fixed while data seeds vary per replicate.
  RngSeed structure_seed{202406};
  Vector beta_custom;  // overrides the first-q placement when sized p
};

struct ScenarioCovariance {
  Matrix sigma;
  Matrix theta_true;  // empty when the design is specified through sigma
  bool has_theta = false;
};

namespace detail {

// AR(1)-style block: entries rho^{|i-j|}.
inline Matrix power_decay_block(Eigen::Index size, double rho) {
  Matrix block(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j)
      block(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
  return block;
}

inline Matrix tridiagonal_block(Eigen::Index size, double diag, double off) {
  Matrix block = Matrix::Zero(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    block(i, i) = diag;
    if (i + 1 < size) {
      block(i, i + 1) = off;
      block(i + 1, i) = off;
    }
  }
  return block;
}

inline Matrix block_diagonal(const Matrix& block, Eigen::Index copies) {
  const auto b = block.rows();
  Matrix out = Matrix::Zero(b * copies, b * copies);
  for (Eigen::Index c = 0; c < copies; ++c)
    out.block(c * b, c * b, b, b) = block;
  return out;
}

}  // namespace detail

// The four simulation designs plus the small path-comparison design:
//   EX1  sigma block diagonal, 5x5 blocks, entries 0.8^|j-j'|
//   EX2  sigma_jj' = 0.8^|j-j'| globally
//   EX3  theta block diagonal, 5x5 tridiagonal (1 on diag, 0.5 first off)
//   EX4  theta = F + delta I, random 0.5 edges (prob 0.02), delta set so the
//        condition number equals p, then rescaled to unit diagonal
//   FIG1 the p=20, 4-block version of EX3
inline ScenarioCovariance scenario_covariance(const ScenarioSpec& spec) {
  const auto p = spec.p;
  if (p < 1 || spec.q < 0 || spec.q > p || spec.noise_sd < 0.0)
    throw invalid_spec("scenario_covariance: bad dimensions");
  ScenarioCovariance out;
  switch (spec.id) {
    case ScenarioId::EX1: {
      if (p % 5 != 0) throw invalid_spec("EX1: p must be divisible by 5");
      out.sigma = detail::block_diagonal(detail::power_decay_block(5, 0.8), p / 5);
      return out;
    }
    case ScenarioId::EX2: {
      out.sigma = detail::power_decay_block(p, 0.8);
      return out;
    }
    case ScenarioId::FIG1:
      if (p != 20) throw invalid_spec("FIG1: p is 20 by construction");
      [[fallthrough]];
    case ScenarioId::EX3: {
      if (p % 5 != 0) throw invalid_spec("EX3: p must be divisible by 5");
      out.theta_true =
          detail::block_diagonal(detail::tridiagonal_block(5, 1.0, 0.5), p / 5);
      out.has_theta = true;
      Eigen::LLT<Matrix> llt(out.theta_true);
      out.sigma = llt.solve(Matrix::Identity(p, p));
      out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
      return out;
    }
    case ScenarioId::EX4: {
      Rng rng(spec.structure_seed);
      Matrix f = Matrix::Zero(p, p);
      bool any_edge = false;
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
          if (rng.uniform() <= 0.02) {
            f(i, j) = 0.5;
            f(j, i) = 0.5;
            any_edge = true;
          }
      if (!any_edge)
        throw invalid_spec("EX4: drew an empty graph; change structure_seed or p");
      Eigen::SelfAdjointEigenSolver<Matrix> es(f, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      // (hi + delta) / (lo + delta) = p, solved exactly.
      const double delta =
          (hi - static_cast<double>(p) * lo) / (static_cast<double>(p) - 1.0);
      Matrix theta = f + delta * Matrix::Identity(p, p);
      // Unit diagonal; the uniform diagonal makes this a pure rescale, so the
      // condition number is untouched.
      out.theta_true = theta / delta;
      out.has_theta = true;
      Eigen::LLT<Matrix> llt(out.theta_true);
      if (llt.info() != Eigen::Success)
        throw invalid_spec("EX4: constructed theta is not positive definite");
      out.sigma = llt.solve(Matrix::Identity(p, p));
      out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
      return out;
    }
  }
  throw invalid_spec("scenario_covariance: unknown scenario");
}

struct Dataset {
  Vector y;
  Matrix x;
  Vector beta_true;
};

// X ~ N(0, sigma(spec)) rows i.i.d., beta with q leading entries at
// beta_value, y = X beta + noise_sd * N(0,1).
inline Dataset generate_dataset(const ScenarioSpec& spec) {
  ScenarioCovariance cov = scenario_covariance(spec);
  Dataset ds;
  ds.x = mvn_sample(Vector::Zero(spec.p), cov.sigma, spec.n,
                    derive_seed(spec.seed, 1));
  if (spec.beta_custom.size() == spec.p) {
    ds.beta_true = spec.beta_custom;
  } else {
    ds.beta_true = Vector::Zero(spec.p);
    for (Eigen::Index j = 0; j < spec.q; ++j) ds.beta_true[j] = spec.beta_value;
  }
  Rng noise(derive_seed(spec.seed, 2));
  ds.y = ds.x * ds.beta_true;
  for (Eigen::Index i = 0; i < spec.n; ++i)
    ds.y[i] += spec.noise_sd * noise.normal();
  return ds;
}

struct Metrics {
  double l2_error = 0.0;
  double mse = 0.0;
};

// l2_error = ||beta_hat - beta_true||_2,
// mse = (1/n_test) ||y_test - X_test beta_hat||_2^2.
inline Metrics compute_metrics(const Vector& beta_hat, const Vector& beta_true,
                               const Vector& y_test, const Matrix& x_test) {
  if (beta_hat.size() != beta_true.size() || x_test.cols() != beta_hat.size() ||
      x_test.rows() != y_test.size())
    throw dimension_mismatch("compute_metrics: dimensions disagree");
  Metrics m;
  m.l2_error = (beta_hat - beta_true).norm();
  m.mse = (y_test - x_test * beta_hat).squaredNorm() /
          static_cast<double>(y_test.size());
  return m;
}

enum class Method { SlsGle, SlsN1, SlsN2, SlsN3, SlsN4, SlsN5, ElasticNet, Lasso };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::SlsGle: return "SLS-GLE";
    case Method::SlsN1: return "SLS-N1";
    case Method::SlsN2: return "SLS-N2";
    case Method::SlsN3: return "SLS-N3";
    case Method::SlsN4: return "SLS-N4";
    case Method::SlsN5: return "SLS-N5";
    case Method::ElasticNet: return "ElasticNet";
    case Method::Lasso: return "Lasso";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  for (Method m : {Method::SlsGle, Method::SlsN1, Method::SlsN2, Method::SlsN3,
                   Method::SlsN4, Method::SlsN5, Method::ElasticNet,
                   Method::Lasso})
    if (method_name(m) == name) return m;
  throw invalid_spec("unknown method: " + name);
}

struct ReplicationResult {
  std::string method;
  Eigen::Index n = 0;
  int replicate = 0;
  double l2_error = 0.0;
  double mse = 0.0;
  bool support_recovered = false;
  long runtime_ms = 0;
};

struct CellFailure {
  std::string method;
  Eigen::Index n = 0;
  int replicate = 0;
  std::string reason;
};

struct MetricsSummary {
  std::string method;
  Eigen::Index n = 0;
  int replicates = 0;
  double l2_mean = 0.0, l2_se = 0.0;
  double mse_mean = 0.0, mse_se = 0.0;
};

struct StudyConfig {
  ScenarioSpec base;  // n and seed overridden per cell
  std::vector<Eigen::Index> n_list;
  std::vector<Method> methods;
  int replications = 20;
  RngSeed seed{0};
  // Empty lambda grids are filled per cell: lambda0 from the covariance,
  // lambda1 from ||X^T y||_inf, lambda2 from the default ladder.
  std::vector<double> lambda0_grid;
  std::vector<double> lambda1_grid;
  std::vector<double> lambda2_grid;
  int lambda0_count = 5;
  int lambda1_count = 30;
  Eigen::Index test_size = 200;
  double fisher_alpha = 0.05;
  double adjacency_k = 1.0;
  GlassoConfig glasso;
  SolverConfig solver;
  int threads = 1;
};

struct StudyResult {
  std::vector<ReplicationResult> results;
  std::vector<CellFailure> failures;
};

namespace detail {

struct SelectedFit {
  Vector beta_raw;
  double intercept = 0.0;
  std::vector<Eigen::Index> support;
};

// BIC selection for one method on one dataset; returns the raw-scale
// coefficients. Shares the chain machinery with grid_search.
inline SelectedFit fit_method(Method method, const Dataset& ds,
                              const StudyConfig& cfg) {
  StandardizationParams params;
  Matrix x_std = standardize_columns(ds.x, &params);
  const double y_mean = ds.y.mean();
  Vector y_c = ds.y.array() - y_mean;
  const Matrix sigma_hat = sample_covariance(x_std);
  const auto p = x_std.cols();
  const auto n = x_std.rows();

  std::vector<double> lam1 = cfg.lambda1_grid.empty()
                                 ? default_lambda1_grid(y_c, x_std, cfg.lambda1_count)
                                 : cfg.lambda1_grid;
  std::vector<double> lam2 = cfg.lambda2_grid.empty() ? default_lambda2_grid()
                                                      : cfg.lambda2_grid;
  std::vector<double> lambda1_desc(lam1.rbegin(), lam1.rend());

  struct Candidate {
    LaplacianMatrix lap;
    double lambda0_label;
  };
  std::vector<Candidate> candidates;
  switch (method) {
    case Method::SlsGle: {
      std::vector<double> lam0 =
          cfg.lambda0_grid.empty()
              ? default_lambda0_grid(sigma_hat, cfg.lambda0_count)
              : cfg.lambda0_grid;
      for (double l0 : lam0) {
        GlassoConfig gcfg = cfg.glasso;
        gcfg.lambda0 = l0;
        candidates.push_back({laplacian_build(glasso_fit(sigma_hat, gcfg)), l0});
      }
      break;
    }
    case Method::SlsN1:
    case Method::SlsN2:
    case Method::SlsN3:
    case Method::SlsN4:
    case Method::SlsN5: {
      const Matrix corr = correlation_from_covariance(sigma_hat);
      const AdjacencyMeasure measure =
          method == Method::SlsN1   ? AdjacencyMeasure::N1
          : method == Method::SlsN2 ? AdjacencyMeasure::N2
          : method == Method::SlsN3 ? AdjacencyMeasure::N3
          : method == Method::SlsN4 ? AdjacencyMeasure::N4
                                    : AdjacencyMeasure::N5;
      const double r = fisher_threshold(n, cfg.fisher_alpha, p);
      candidates.push_back(
          {laplacian_build(adjacency_from_correlation(corr, measure, r,
                                                      cfg.adjacency_k)),
           0.0});
      break;
    }
    case Method::ElasticNet:
      candidates.push_back({identity_penalty(p), 0.0});
      break;
    case Method::Lasso:
      candidates.push_back({zero_penalty(p), 0.0});
      lam2 = {0.0};
      break;
  }

  bool have_best = false;
  BicRecord best;
  FitResult best_fit;
  for (const Candidate& cand : candidates) {
    RegressionProblem prob{y_c, x_std, cand.lap};
    for (double l2 : lam2) {
      ChainResult chain =
          lambda1_chain(prob, lambda1_desc, cand.lambda0_label, l2, cfg.solver);
      for (std::size_t i = 0; i < chain.records.size(); ++i) {
        if (!have_best || cell_beats(chain.records[i], best)) {
          have_best = true;
          best = chain.records[i];
          best_fit = chain.fits[i];
        }
      }
    }
  }
  if (!have_best) throw invalid_spec("fit_method: empty grid");

  SelectedFit out;
  out.beta_raw = best_fit.beta.array() / params.scales.array();
  out.intercept = y_mean - out.beta_raw.dot(params.means);
  out.support = best_fit.active_set;
  return out;
}

}  // namespace detail

// Seeded replication study: for each (n, replicate) a fresh dataset shared
// by all methods; each method tuned by BIC; out-of-sample metrics on a fresh
// test draw. Deterministic given cfg.seed regardless of thread count.
inline StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.replications < 1) throw invalid_spec("run_study: replications >= 1");
  if (cfg.n_list.empty() || cfg.methods.empty())
    throw invalid_spec("run_study: need at least one n and one method");

  struct Cell {
    Eigen::Index n;
    int rep;
    Method method;
  };
  std::vector<Cell> cells;
  for (Eigen::Index n : cfg.n_list)
    for (int rep = 0; rep < cfg.replications; ++rep)
      for (Method m : cfg.methods) cells.push_back({n, rep, m});

  std::vector<ReplicationResult> results(cells.size());
  std::vector<char> failed(cells.size(), 0);
  std::vector<std::string> reasons(cells.size());

  auto worker = [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    ScenarioSpec spec = cfg.base;
    spec.n = cell.n;
    spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(cell.n),
                            static_cast<std::uint64_t>(cell.rep), 1);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Dataset ds = generate_dataset(spec);
      ScenarioSpec test_spec = spec;
      test_spec.n = cfg.test_size;
      test_spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(cell.n),
                                   static_cast<std::uint64_t>(cell.rep), 2);
      Dataset test = generate_dataset(test_spec);

      detail::SelectedFit sel = detail::fit_method(cell.method, ds, cfg);
      Metrics m = compute_metrics(
          sel.beta_raw, ds.beta_true,
          Vector(test.y.array() - sel.intercept), test.x);

      std::vector<Eigen::Index> true_support;
      for (Eigen::Index j = 0; j < ds.beta_true.size(); ++j)
        if (ds.beta_true[j] != 0.0) true_support.push_back(j);

      ReplicationResult& r = results[idx];
      r.method = method_name(cell.method);
      r.n = cell.n;
      r.replicate = cell.rep;
      r.l2_error = m.l2_error;
      r.mse = m.mse;
      r.support_recovered = sel.support == true_support;
      r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    } catch (const std::exception& e) {
      failed[idx] = 1;
      reasons[idx] = e.what();
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) worker(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size();
             i = next.fetch_add(1))
          worker(i);
      });
    for (auto& th : pool) th.join();
  }

  StudyResult out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (failed[i])
      out.failures.push_back({method_name(cells[i].method), cells[i].n,
                              cells[i].rep, reasons[i]});
    else
      out.results.push_back(results[i]);
  }
  auto key = [](const ReplicationResult& r) {
    return std::make_tuple(r.method, r.n, r.replicate);
  };
  std::sort(out.results.begin(), out.results.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::sort(out.failures.begin(), out.failures.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.method, a.n, a.replicate) <
           std::make_tuple(b.method, b.n, b.replicate);
  });
  return out;
}

// Mean and standard error per (method, n).
inline std::vector<MetricsSummary> summarize_results(
    const std::vector<ReplicationResult>& results) {
  std::vector<MetricsSummary> out;
  for (const ReplicationResult& r : results) {
    MetricsSummary* slot = nullptr;
    for (MetricsSummary& s : out)
      if (s.method == r.method && s.n == r.n) slot = &s;
    if (!slot) {
      out.push_back({r.method, r.n, 0, 0.0, 0.0, 0.0, 0.0});
      slot = &out.back();
    }
    ++slot->replicates;
    slot->l2_mean += r.l2_error;
    slot->mse_mean += r.mse;
  }
  for (MetricsSummary& s : out) {
    s.l2_mean /= s.replicates;
    s.mse_mean /= s.replicates;
  }
  for (MetricsSummary& s : out) {
    if (s.replicates < 2) continue;
    double l2_var = 0.0, mse_var = 0.0;
    for (const ReplicationResult& r : results)
      if (r.method == s.method && r.n == s.n) {
        l2_var += (r.l2_error - s.l2_mean) * (r.l2_error - s.l2_mean);
        mse_var += (r.mse - s.mse_mean) * (r.mse - s.mse_mean);
      }
    s.l2_se = std::sqrt(l2_var / (s.replicates - 1) / s.replicates);
    s.mse_se = std::sqrt(mse_var / (s.replicates - 1) / s.replicates);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.method, a.n) < std::make_tuple(b.method, b.n);
  });
  return out;
}

}  // namespace slsgle
