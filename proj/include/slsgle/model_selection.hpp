#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "slsgle/glasso.hpp"
#include "slsgle/laplacian.hpp"
#include "slsgle/linalg.hpp"
#include "slsgle/solver.hpp"

namespace slsgle {

struct TuningGrid {
  std::vector<double> lambda0_grid;
  std::vector<double> lambda1_grid;
  std::vector<double> lambda2_grid;
};

inline void validate_grid(const std::vector<double>& g, const std::string& name) {
  if (g.empty()) throw invalid_spec(name + " grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0.0) throw invalid_spec(name + " grid has a negative value");
    if (i > 0 && g[i] <= g[i - 1])
      throw invalid_spec(name + " grid must be strictly ascending");
  }
}

struct BicScore {
  double bic = 0.0;
  Eigen::Index df = 0;
  double rss = 0.0;
};

// bic = n log(rss/n) + df log(n) with df = |active set|.
inline BicScore bic_score(const RegressionProblem& prob, const FitResult& fit) {
  const auto n = prob.x.rows();
  BicScore score;
  score.rss = (prob.y - prob.x * fit.beta).squaredNorm();
  if (score.rss <= 0.0)
    throw degenerate_rss("bic_score: zero residual sum of squares");
  score.df = static_cast<Eigen::Index>(fit.active_set.size());
  score.bic = static_cast<double>(n) * std::log(score.rss / static_cast<double>(n)) +
              static_cast<double>(score.df) * std::log(static_cast<double>(n));
  return score;
}

struct BicRecord {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Eigen::Index df = 0;
  double rss = 0.0;
  double bic = 0.0;
};

struct SelectionReport {
  double best_lambda0 = 0.0;
  double best_lambda1 = 0.0;
  double best_lambda2 = 0.0;
  std::vector<BicRecord> bic_table;
  FitResult fit;                // best fit, standardized coordinates
  PrecisionEstimate precision;  // at best lambda0
  StandardizationParams standardization;
  double y_mean = 0.0;
};

// 30 log-spaced penalties in [0.01, 1] * ||X^T y||_inf.
inline std::vector<double> default_lambda1_grid(const Vector& y, const Matrix& x,
                                                int count = 30) {
  double lam_max = (x.transpose() * y).cwiseAbs().maxCoeff();
  if (lam_max <= 0.0) lam_max = 1.0;
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = 0.1 * lam_max;
    return grid;
  }
  const double lo = std::log(0.01), hi = std::log(1.0);
  for (int i = 0; i < count; ++i)
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (count - 1)) * lam_max;
  return grid;
}

inline std::vector<double> default_lambda2_grid() {
  return {0.01, 0.1, 0.5, 1.0, 5.0, 10.0};
}

namespace detail {

struct ChainResult {
  std::vector<BicRecord> records;
  std::vector<FitResult> fits;  // same order as records (descending lambda1)
};

// Warm-started coordinate-descent chain along descending lambda1 at fixed
// (gamma, lambda2). The support is expected to grow as lambda1 decreases;
// single-coordinate drops are a real feature of lasso paths on correlated
// designs, so only a large shrink (beyond 2 + 10% of the previous support,
// which indicates a solver malfunction) aborts with the grid coordinates.
inline ChainResult lambda1_chain(const RegressionProblem& prob,
                                 const std::vector<double>& lambda1_desc,
                                 double lambda0_label, double lambda2,
                                 const SolverConfig& base_cfg) {
  ChainResult out;
  SolverConfig cfg = base_cfg;
  cfg.lambda2 = lambda2;
  cfg.beta_init = BetaInit::Zeros;
  std::size_t prev_support = 0;
  bool first = true;
  for (double lam1 : lambda1_desc) {
    PenaltySpec pen{PenaltyKind::L1, lam1, 3.0};
    FitResult fit;
    try {
      fit = coordinate_descent_fit(prob, pen, cfg);
    } catch (const error& e) {
      throw invalid_spec(std::string(e.what()) + " [lambda0=" +
                         std::to_string(lambda0_label) + ", lambda1=" +
                         std::to_string(lam1) + ", lambda2=" +
                         std::to_string(lambda2) + "]");
    }
    const std::size_t allowance = 2 + prev_support / 10;
    if (!first && fit.active_set.size() + allowance < prev_support)
      throw path_monotonicity_violation(
          "support size collapsed while lambda1 decreased", lambda0_label,
          lam1, lambda2);
    prev_support = fit.active_set.size();
    first = false;
    BicScore score;
    try {
      score = bic_score(prob, fit);
    } catch (const error& e) {
      throw degenerate_rss(std::string(e.what()) + " [lambda0=" +
                           std::to_string(lambda0_label) + ", lambda1=" +
                           std::to_string(lam1) + ", lambda2=" +
                           std::to_string(lambda2) + "]");
    }
    out.records.push_back(
        {lambda0_label, lam1, lambda2, score.df, score.rss, score.bic});
    cfg.beta_init = BetaInit::Custom;
    cfg.beta_custom = fit.beta;
    out.fits.push_back(std::move(fit));
  }
  return out;
}

// Minimum-BIC cell with ties broken toward larger lambda1, then larger
// lambda2 (the sparser model).
inline bool cell_beats(const BicRecord& cand, const BicRecord& best) {
  if (cand.bic != best.bic) return cand.bic < best.bic;
  if (cand.lambda1 != best.lambda1) return cand.lambda1 > best.lambda1;
  return cand.lambda2 > best.lambda2;
}

}  // namespace detail

struct GridSearchOptions {
  GlassoConfig glasso;   // lambda0 is overridden per grid point
  SolverConfig solver;   // lambda2/beta_init are managed by the search
  bool standardize = true;
};

// Exhaustive BIC search over (lambda0, lambda1, lambda2): glasso at each
// lambda0 gives the Laplacian, then warm-started lasso chains cover the
// (lambda1, lambda2) plane. X is standardized and y centered internally;
// the returned fit lives in those coordinates with the transform attached.
inline SelectionReport grid_search(const Vector& y, const Matrix& x,
                                   const TuningGrid& grid,
                                   const GridSearchOptions& opts = {}) {
  validate_grid(grid.lambda0_grid, "lambda0");
  validate_grid(grid.lambda1_grid, "lambda1");
  validate_grid(grid.lambda2_grid, "lambda2");
  if (y.size() != x.rows())
    throw dimension_mismatch("grid_search: y/X row mismatch");

  SelectionReport report;
  Matrix x_std = x;
  Vector y_c = y;
  if (opts.standardize) {
    x_std = standardize_columns(x, &report.standardization);
    report.y_mean = y.mean();
    y_c = y.array() - report.y_mean;
  } else {
    report.standardization.means = Vector::Zero(x.cols());
    report.standardization.scales = Vector::Ones(x.cols());
  }
  const Matrix sigma_hat = sample_covariance(x_std);

  std::vector<double> lambda1_desc(grid.lambda1_grid.rbegin(),
                                   grid.lambda1_grid.rend());
  bool have_best = false;
  BicRecord best;
  for (double lam0 : grid.lambda0_grid) {
    GlassoConfig gcfg = opts.glasso;
    gcfg.lambda0 = lam0;
    PrecisionEstimate est = glasso_fit(sigma_hat, gcfg);
    LaplacianMatrix lap = laplacian_build(est);
    RegressionProblem prob{y_c, x_std, lap};
    for (double lam2 : grid.lambda2_grid) {
      detail::ChainResult chain = detail::lambda1_chain(
          prob, lambda1_desc, lam0, lam2, opts.solver);
      for (std::size_t i = 0; i < chain.records.size(); ++i) {
        report.bic_table.push_back(chain.records[i]);
        if (!have_best || detail::cell_beats(chain.records[i], best)) {
          have_best = true;
          best = chain.records[i];
          report.fit = chain.fits[i];
          report.precision = est;
        }
      }
    }
  }
  report.best_lambda0 = best.lambda0;
  report.best_lambda1 = best.lambda1;
  report.best_lambda2 = best.lambda2;
  return report;
}

// Bisection on lambda1 until the support size lands in [m-2, m] (at most 40
// steps); otherwise the fit whose support is closest to m without exceeding
// it. Expects the problem data as it will be fitted (already standardized).
inline FitResult target_support_size(const Vector& y, const Matrix& x,
                                     const LaplacianMatrix& gamma,
                                     double lambda2, Eigen::Index m,
                                     const SolverConfig& base_cfg = {}) {
  const auto p = x.cols();
  if (m < 1 || m > p)
    throw invalid_spec("target_support_size: need 1 <= m <= p");
  RegressionProblem prob{y, x, gamma};
  SolverConfig cfg = base_cfg;
  cfg.lambda2 = lambda2;
  const double lam_max = (x.transpose() * y).cwiseAbs().maxCoeff();

  auto fit_at = [&](double lam1, const Vector* warm) {
    SolverConfig c = cfg;
    if (warm) {
      c.beta_init = BetaInit::Custom;
      c.beta_custom = *warm;
    } else {
      c.beta_init = BetaInit::Zeros;
    }
    return coordinate_descent_fit(prob, {PenaltyKind::L1, lam1, 3.0}, c);
  };

  // Reachability probe at lambda1 -> 0+.
  FitResult probe = fit_at(1e-10 * std::max(lam_max, 1.0), nullptr);
  const auto reach = static_cast<Eigen::Index>(probe.active_set.size());
  if (reach < m - 2)
    throw unreachable_size("target_support_size: only " +
                           std::to_string(reach) + " coefficients activate, " +
                           std::to_string(m) + " requested");

  // Track the best admissible fit: support as close to m as possible
  // without exceeding it; at equal support the smaller lambda1 (least
  // shrinkage) wins. Bisection exits early only on an exact hit.
  FitResult best;
  bool have_best = false;
  auto consider = [&](const FitResult& fit) {
    const auto s = static_cast<Eigen::Index>(fit.active_set.size());
    if (s > m) return false;
    const auto best_s = static_cast<Eigen::Index>(best.active_set.size());
    if (!have_best || s > best_s ||
        (s == best_s && fit.lambda1 < best.lambda1)) {
      best = fit;
      have_best = true;
    }
    return s == m;
  };
  if (consider(probe)) return best;

  double lo = 1e-10 * std::max(lam_max, 1.0);  // large support end
  double hi = lam_max;                         // empty support end
  Vector warm = probe.beta;
  for (int step = 0; step < 40; ++step) {
    const double mid = 0.5 * (lo + hi);
    FitResult fit = fit_at(mid, &warm);
    warm = fit.beta;
    const auto s = static_cast<Eigen::Index>(fit.active_set.size());
    if (consider(fit)) return best;
    if (s > m)
      lo = mid;
    else
      hi = mid;
  }
  if (!have_best ||
      static_cast<Eigen::Index>(best.active_set.size()) < m - 2)
    throw unreachable_size("target_support_size: no support within [m-2, m]");
  return best;
}

}  // namespace slsgle
