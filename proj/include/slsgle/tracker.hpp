#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slsgle/glasso.hpp"
#include "slsgle/laplacian.hpp"
#include "slsgle/linalg.hpp"
#include "slsgle/model_selection.hpp"
#include "slsgle/rng.hpp"
#include "slsgle/solver.hpp"

namespace slsgle {

// Daily price panel: index plus constituent assets, strictly increasing
// dates, all prices positive.
struct PricePanel {
  std::vector<std::string> dates;  // ISO-8601
  Vector index_prices;
  Matrix asset_prices;  // T x N
  std::vector<std::string> asset_ids;
};

struct LoadConfig {
  bool sort_on_load = false;
  bool forward_fill = false;     // fill missing cells from the previous row
  bool drop_bad_assets = false;  // drop assets with nonpositive/missing data
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline bool parse_price(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0') return false;
  *out = v;
  return true;
}

}  // namespace detail

// CSV layout: header "date,index,<asset_id>..."; ISO-8601 dates; decimal
// prices. Missing cells are empty fields.
inline PricePanel load_prices(std::istream& in, const LoadConfig& cfg = {},
                              std::vector<std::string>* warnings = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty file", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "date" || header[1] != "index")
    throw parse_error("header must be date,index,<asset ids>", 1);
  const std::size_t n_assets = header.size() - 2;

  struct Row {
    std::string date;
    double index;
    std::vector<double> prices;  // NaN marks a missing cell
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw parse_error("expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()),
                        line_no);
    Row row;
    row.date = fields[0];
    if (row.date.empty()) throw parse_error("empty date", line_no);
    if (!detail::parse_price(fields[1], &row.index))
      throw parse_error("unparseable index price '" + fields[1] + "'", line_no);
    if (row.index <= 0.0) throw nonpositive_price("index", row.date);
    row.prices.resize(n_assets);
    for (std::size_t j = 0; j < n_assets; ++j) {
      double v;
      if (fields[2 + j].empty())
        v = std::numeric_limits<double>::quiet_NaN();
      else if (!detail::parse_price(fields[2 + j], &v))
        throw parse_error("unparseable price '" + fields[2 + j] + "'", line_no);
      row.prices[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw parse_error("need at least two data rows", line_no);

  if (cfg.sort_on_load)
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date <= rows[i - 1].date)
      throw unsorted_dates("dates not strictly increasing at " + rows[i].date);

  if (cfg.forward_fill)
    for (std::size_t i = 1; i < rows.size(); ++i)
      for (std::size_t j = 0; j < n_assets; ++j)
        if (std::isnan(rows[i].prices[j]))
          rows[i].prices[j] = rows[i - 1].prices[j];

  std::vector<bool> keep(n_assets, true);
  for (std::size_t j = 0; j < n_assets; ++j) {
    for (const Row& row : rows) {
      const double v = row.prices[j];
      if (std::isnan(v) || v <= 0.0) {
        if (!cfg.drop_bad_assets) {
          if (std::isnan(v))
            throw parse_error("missing price for " + header[2 + j] + " at " +
                                  row.date,
                              0);
          throw nonpositive_price(header[2 + j], row.date);
        }
        keep[j] = false;
        if (warnings)
          warnings->push_back("dropped asset " + header[2 + j] +
                              " (nonpositive or missing price at " + row.date +
                              ")");
        break;
      }
    }
  }

  PricePanel panel;
  std::size_t kept = 0;
  for (std::size_t j = 0; j < n_assets; ++j)
    if (keep[j]) {
      panel.asset_ids.push_back(header[2 + j]);
      ++kept;
    }
  if (kept == 0) throw parse_error("no usable asset columns", 0);
  panel.dates.reserve(rows.size());
  panel.index_prices.resize(rows.size());
  panel.asset_prices.resize(rows.size(), kept);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    panel.dates.push_back(rows[i].date);
    panel.index_prices[static_cast<Eigen::Index>(i)] = rows[i].index;
    std::size_t c = 0;
    for (std::size_t j = 0; j < n_assets; ++j)
      if (keep[j])
        panel.asset_prices(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(c++)) = rows[i].prices[j];
  }
  return panel;
}

inline PricePanel load_prices(const std::string& path, const LoadConfig& cfg = {},
                              std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path, 0);
  return load_prices(in, cfg, warnings);
}

// r_t = (y_t - y_{t-1}) / y_{t-1}
inline Vector simple_returns(const Vector& prices) {
  if (prices.size() < 2) throw too_short("simple_returns: need >= 2 prices");
  for (Eigen::Index t = 0; t < prices.size(); ++t)
    if (prices[t] <= 0.0)
      throw nonpositive_price("series", "t=" + std::to_string(t));
  Vector r(prices.size() - 1);
  for (Eigen::Index t = 1; t < prices.size(); ++t)
    r[t - 1] = (prices[t] - prices[t - 1]) / prices[t - 1];
  return r;
}

// ATE = sqrt(252) * sd(realized - predicted), sd with the T-1 divisor.
inline double annual_tracking_error(const Vector& realized_returns,
                                    const Vector& predicted_returns) {
  const auto t = realized_returns.size();
  if (t != predicted_returns.size())
    throw dimension_mismatch("annual_tracking_error: length mismatch");
  if (t < 2) throw too_short("annual_tracking_error: need T >= 2");
  Vector err = realized_returns - predicted_returns;
  const double mean = err.mean();
  const double var = (err.array() - mean).square().sum() / (t - 1);
  return std::sqrt(252.0) * std::sqrt(var);
}

struct WindowConfig {
  Eigen::Index train_len = 100;
  Eigen::Index test_len = 20;  // windows advance by this amount
};

struct BacktestConfig {
  std::vector<Eigen::Index> subset_sizes;
  std::vector<double> lambda2_grid = default_lambda2_grid();
  double lambda0 = 0.1;
  WindowConfig window;
  GlassoConfig glasso;  // lambda0 above takes precedence
  SolverConfig solver;
  bool returns_mode = false;  // regress returns instead of price levels
  double large_error_threshold = 50.0;  // price units
};

struct WindowReport {
  int window_index = 0;
  Eigen::Index m = 0;
  std::string train_start, train_end, test_start, test_end;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double ate = 0.0;
  std::vector<std::string> selected_ids;
  Vector predicted;  // index path over the test range (price levels)
  Vector realized;
  std::vector<Eigen::Index> large_error_at;  // test offsets with |err| > threshold
  bool ok = true;
  std::string note;
};

struct BacktestReport {
  std::vector<WindowReport> windows;  // one row per (window, subset size)
  std::vector<std::pair<Eigen::Index, double>> ate_by_size;  // mean over windows
  int n_windows = 0;
};

// Rolling non-overlapping evaluation: train on train_len rows, forecast the
// next test_len, advance by test_len. Within each window the predictors are
// standardized on training data only, the precision graph is fit at the
// given lambda0, lambda2 is picked by BIC, and lambda1 is bisected to hit
// the requested support size.
inline BacktestReport run_backtest(const PricePanel& panel,
                                   const BacktestConfig& cfg) {
  const auto total = panel.index_prices.size();
  const auto train = cfg.window.train_len;
  const auto test = cfg.window.test_len;
  if (train < 4 || test < 2)
    throw invalid_spec("run_backtest: degenerate window lengths");
  if (total < train + test)
    throw too_short("run_backtest: panel shorter than one window");
  if (cfg.subset_sizes.empty())
    throw invalid_spec("run_backtest: no subset sizes");

  BacktestReport report;
  const int n_windows = static_cast<int>((total - train) / test);
  report.n_windows = n_windows;

  for (int w = 0; w < n_windows; ++w) {
    const Eigen::Index train_begin = static_cast<Eigen::Index>(w) * test;
    const Eigen::Index test_begin = train_begin + train;

    Matrix x_train_raw = panel.asset_prices.middleRows(train_begin, train);
    Vector y_train_raw = panel.index_prices.segment(train_begin, train);
    Matrix x_test_raw = panel.asset_prices.middleRows(test_begin, test);
    Vector y_test_raw = panel.index_prices.segment(test_begin, test);
    if (cfg.returns_mode) {
      // Returns over the training range and across the train/test boundary.
      Matrix xr(train - 1, x_train_raw.cols());
      for (Eigen::Index j = 0; j < x_train_raw.cols(); ++j)
        xr.col(j) = simple_returns(x_train_raw.col(j));
      Matrix x_joint(test + 1, x_train_raw.cols());
      x_joint.row(0) = x_train_raw.row(train - 1);
      x_joint.bottomRows(test) = x_test_raw;
      Matrix xrt(test, x_train_raw.cols());
      for (Eigen::Index j = 0; j < x_joint.cols(); ++j)
        xrt.col(j) = simple_returns(x_joint.col(j));
      Vector y_joint(test + 1);
      y_joint[0] = y_train_raw[train - 1];
      y_joint.tail(test) = y_test_raw;
      x_train_raw = xr;
      y_train_raw = simple_returns(y_train_raw);
      x_test_raw = xrt;
      y_test_raw = simple_returns(y_joint);
    }

    StandardizationParams params;
    Matrix x_std;
    PrecisionEstimate est;
    LaplacianMatrix lap;
    bool window_ok = true;
    std::string window_note;
    try {
      x_std = standardize_columns(x_train_raw, &params);
      GlassoConfig gcfg = cfg.glasso;
      gcfg.lambda0 = cfg.lambda0;
      est = glasso_fit(sample_covariance(x_std), gcfg);
      lap = laplacian_build(est);
    } catch (const std::exception& e) {
      window_ok = false;
      window_note = e.what();
    }
    const double y_mean = y_train_raw.mean();
    Vector y_c = y_train_raw.array() - y_mean;

    for (Eigen::Index m : cfg.subset_sizes) {
      WindowReport wr;
      wr.window_index = w;
      wr.m = m;
      wr.train_start = panel.dates[static_cast<std::size_t>(train_begin)];
      wr.train_end = panel.dates[static_cast<std::size_t>(test_begin - 1)];
      wr.test_start = panel.dates[static_cast<std::size_t>(test_begin)];
      wr.test_end =
          panel.dates[static_cast<std::size_t>(test_begin + test - 1)];
      if (!window_ok) {
        wr.ok = false;
        wr.note = window_note;
        report.windows.push_back(std::move(wr));
        continue;
      }
      try {
        // lambda2 by BIC on the training window, larger lambda2 on ties.
        FitResult best;
        double best_bic = 0.0, best_lambda2 = 0.0;
        bool have = false;
        RegressionProblem prob{y_c, x_std, lap};
        for (double l2 : cfg.lambda2_grid) {
          FitResult fit =
              target_support_size(y_c, x_std, lap, l2, m, cfg.solver);
          const BicScore score = bic_score(prob, fit);
          if (!have || score.bic < best_bic ||
              (score.bic == best_bic && l2 > best_lambda2)) {
            have = true;
            best = fit;
            best_bic = score.bic;
            best_lambda2 = l2;
          }
        }
        wr.lambda1 = best.lambda1;
        wr.lambda2 = best_lambda2;
        for (Eigen::Index j : best.active_set)
          wr.selected_ids.push_back(panel.asset_ids[static_cast<std::size_t>(j)]);

        // The penalized fit picks the assets; the tracking weights are the
        // least-squares refit on that subset, which removes the l1 shrinkage
        // bias from the forecast.
        Vector beta_std = Vector::Zero(x_std.cols());
        if (!best.active_set.empty()) {
          Matrix x_sub(x_std.rows(),
                       static_cast<Eigen::Index>(best.active_set.size()));
          for (std::size_t k = 0; k < best.active_set.size(); ++k)
            x_sub.col(static_cast<Eigen::Index>(k)) =
                x_std.col(best.active_set[k]);
          Vector coef = x_sub.colPivHouseholderQr().solve(y_c);
          for (std::size_t k = 0; k < best.active_set.size(); ++k)
            beta_std[best.active_set[k]] = coef[static_cast<Eigen::Index>(k)];
        }
        Vector beta_raw = beta_std.array() / params.scales.array();
        const double intercept = y_mean - beta_raw.dot(params.means);

        Vector y_hat = (x_test_raw * beta_raw).array() + intercept;
        wr.predicted = y_hat;
        wr.realized = y_test_raw;
        if (cfg.returns_mode) {
          wr.ate = annual_tracking_error(y_test_raw, y_hat);
        } else {
          // Prepend the last training price so the first forecast return is
          // anchored at observed data.
          Vector realized_path(test + 1), predicted_path(test + 1);
          realized_path[0] = y_train_raw[train - 1];
          predicted_path[0] = y_train_raw[train - 1];
          realized_path.tail(test) = y_test_raw;
          predicted_path.tail(test) = y_hat;
          wr.ate = annual_tracking_error(simple_returns(realized_path),
                                         simple_returns(predicted_path));
          for (Eigen::Index t = 0; t < test; ++t)
            if (std::abs(y_hat[t] - y_test_raw[t]) > cfg.large_error_threshold)
              wr.large_error_at.push_back(t);
        }
      } catch (const std::exception& e) {
        wr.ok = false;
        wr.note = e.what();
      }
      report.windows.push_back(std::move(wr));
    }
  }

  for (Eigen::Index m : cfg.subset_sizes) {
    double sum = 0.0;
    int count = 0;
    for (const WindowReport& wr : report.windows)
      if (wr.ok && wr.m == m) {
        sum += wr.ate;
        ++count;
      }
    report.ate_by_size.emplace_back(m, count > 0 ? sum / count : 0.0);
  }
  return report;
}

struct SyntheticPanelSpec {
  Eigen::Index n_assets = 30;
  Eigen::Index n_days = 120;
  Eigen::Index true_subset = 10;
  double index_noise_sd = 0.0;  // price units added to the combination
  double asset_vol = 0.01;
  double asset_drift = 2e-4;
  // true: geometric random walks; false: jitter around a fixed level,
  // which keeps spurious cross-asset correlation small in short panels
  bool random_walk = true;
  RngSeed seed{7};
};

namespace detail {

// days -> ISO-8601 from a fixed epoch (civil-from-days, Gregorian).
inline std::string iso_date_from_serial(long serial) {
  long z = serial + 719468;  // days since 0000-03-01
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04ld-%02u-%02u", y + (m <= 2 ? 1 : 0), m, d);
  return buf;
}

}  // namespace detail

// Factor-model panel: geometric random-walk assets, index = positive
// weighted sum of the first true_subset assets plus optional noise.
inline PricePanel make_synthetic_panel(const SyntheticPanelSpec& spec) {
  if (spec.true_subset < 1 || spec.true_subset > spec.n_assets)
    throw invalid_spec("make_synthetic_panel: bad true_subset");
  Rng rng(spec.seed);
  PricePanel panel;
  panel.asset_prices.resize(spec.n_days, spec.n_assets);
  for (Eigen::Index j = 0; j < spec.n_assets; ++j) {
    panel.asset_ids.push_back("A" + std::to_string(j));
    const double base = 50.0 + 100.0 * rng.uniform();
    double price = base;
    for (Eigen::Index t = 0; t < spec.n_days; ++t) {
      panel.asset_prices(t, j) = price;
      if (spec.random_walk)
        price *= std::exp(spec.asset_drift + spec.asset_vol * rng.normal());
      else
        price = base * std::exp(spec.asset_vol * rng.normal());
    }
  }
  Vector weights = Vector::Zero(spec.n_assets);
  for (Eigen::Index j = 0; j < spec.true_subset; ++j)
    weights[j] = 0.5 + rng.uniform();
  panel.index_prices = panel.asset_prices * weights;
  if (spec.index_noise_sd > 0.0)
    for (Eigen::Index t = 0; t < spec.n_days; ++t)
      panel.index_prices[t] =
          std::max(1.0, panel.index_prices[t] + spec.index_noise_sd * rng.normal());
  const long epoch = 18262;  // 2020-01-01
  for (Eigen::Index t = 0; t < spec.n_days; ++t)
    panel.dates.push_back(detail::iso_date_from_serial(epoch + t));
  return panel;
}

}  // namespace slsgle
