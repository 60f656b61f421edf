// Command-line front end: simulate / fit / tune / backtest, each driven by a
// declarative JSON config plus a few override flags. Exit codes: 0 success,
// 1 fatal error, 2 partial (some cells or windows failed, report written).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slsgle/slsgle.hpp"

namespace fs = std::filesystem;
using slsgle::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw slsgle::config_error("$", "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw slsgle::config_error("$", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw slsgle::config_error("$", "config must be an object");
  const int version = j.value("version", 0);
  if (version != 1)
    throw slsgle::config_error("$.version", "expected schema version 1");
  return j;
}

template <typename T>
T require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw slsgle::config_error(path, "missing field");
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw slsgle::config_error(path, "wrong type");
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback,
           const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw slsgle::config_error(path, "wrong type");
  }
}

slsgle::SolverConfig solver_from(const json& j) {
  slsgle::SolverConfig cfg;
  if (!j.contains("solver")) return cfg;
  const json& s = j.at("solver");
  cfg.tol = field_or(s, "tol", cfg.tol, "$.solver.tol");
  cfg.max_passes = field_or(s, "max_passes", cfg.max_passes, "$.solver.max_passes");
  return cfg;
}

slsgle::GlassoConfig glasso_from(const json& j) {
  slsgle::GlassoConfig cfg;
  if (!j.contains("glasso")) return cfg;
  const json& g = j.at("glasso");
  cfg.tol = field_or(g, "tol", cfg.tol, "$.glasso.tol");
  cfg.max_sweeps = field_or(g, "max_sweeps", cfg.max_sweeps, "$.glasso.max_sweeps");
  cfg.penalize_diagonal = field_or(g, "penalize_diagonal", cfg.penalize_diagonal,
                                   "$.glasso.penalize_diagonal");
  return cfg;
}

slsgle::ScenarioId scenario_from_name(const std::string& name) {
  for (auto id : {slsgle::ScenarioId::EX1, slsgle::ScenarioId::EX2,
                  slsgle::ScenarioId::EX3, slsgle::ScenarioId::EX4,
                  slsgle::ScenarioId::FIG1})
    if (slsgle::scenario_name(id) == name) return id;
  throw slsgle::config_error("$.scenario.id", "unknown scenario " + name);
}

// Data CSV for fit/tune: header "y,<predictor names...>", one row per sample.
void load_regression_csv(const std::string& path, slsgle::Vector* y,
                         slsgle::Matrix* x) {
  std::ifstream in(path);
  if (!in) throw slsgle::parse_error("cannot open " + path, 0);
  std::string line;
  if (!std::getline(in, line)) throw slsgle::parse_error("empty file", 0);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw slsgle::parse_error("unparseable number '" + field + "'", line_no);
      }
    }
    if (row.size() < 2) throw slsgle::parse_error("need y plus predictors", line_no);
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw slsgle::parse_error("ragged row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw slsgle::parse_error("need at least 2 rows", line_no);
  y->resize(static_cast<Eigen::Index>(rows.size()));
  x->resize(static_cast<Eigen::Index>(rows.size()),
            static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (*y)[static_cast<Eigen::Index>(i)] = rows[i][0];
    for (std::size_t j = 1; j < width; ++j)
      (*x)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) =
          rows[i][j];
  }
}

std::vector<double> grid_field(const json& grids, const std::string& key,
                               const std::string& path) {
  if (!grids.contains(key)) return {};
  return require_field<std::vector<double>>(grids, key, path);
}

struct CommonArgs {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool timings = false;
};

int cmd_simulate(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  slsgle::StudyConfig study;
  const json& sc = cfg.contains("scenario") ? cfg.at("scenario") : json::object();
  study.base.id = scenario_from_name(field_or<std::string>(sc, "id", "EX3", "$.scenario.id"));
  study.base.p = field_or<Eigen::Index>(sc, "p", 60, "$.scenario.p");
  study.base.q = field_or<Eigen::Index>(sc, "q", 10, "$.scenario.q");
  study.base.beta_value = field_or(sc, "beta_value", 1.5, "$.scenario.beta_value");
  study.base.noise_sd = field_or(sc, "noise_sd", 1.0, "$.scenario.noise_sd");
  study.base.structure_seed.value =
      field_or<std::uint64_t>(sc, "structure_seed", 202406, "$.scenario.structure_seed");
  study.n_list = require_field<std::vector<Eigen::Index>>(cfg, "n_list", "$.n_list");
  for (const std::string& name :
       require_field<std::vector<std::string>>(cfg, "methods", "$.methods")) {
    try {
      study.methods.push_back(slsgle::method_from_name(name));
    } catch (const slsgle::error& e) {
      throw slsgle::config_error("$.methods", e.what());
    }
  }
  study.replications = field_or(cfg, "replications", 20, "$.replications");
  study.seed.value = field_or<std::uint64_t>(cfg, "seed", 0, "$.seed");
  if (args.seed) study.seed.value = *args.seed;
  study.test_size = field_or<Eigen::Index>(cfg, "test_size", 200, "$.test_size");
  study.fisher_alpha = field_or(cfg, "fisher_alpha", 0.05, "$.fisher_alpha");
  study.adjacency_k = field_or(cfg, "adjacency_k", 1.0, "$.adjacency_k");
  if (cfg.contains("grids")) {
    const json& grids = cfg.at("grids");
    study.lambda0_grid = grid_field(grids, "lambda0", "$.grids.lambda0");
    study.lambda1_grid = grid_field(grids, "lambda1", "$.grids.lambda1");
    study.lambda2_grid = grid_field(grids, "lambda2", "$.grids.lambda2");
    study.lambda0_count = field_or(grids, "lambda0_count", 5, "$.grids.lambda0_count");
    study.lambda1_count = field_or(grids, "lambda1_count", 30, "$.grids.lambda1_count");
  }
  study.solver = solver_from(cfg);
  study.glasso = glasso_from(cfg);
  study.threads = args.threads;

  slsgle::StudyResult result = slsgle::run_study(study);

  std::ostringstream raw, summary;
  slsgle::raw_results_to_csv(raw, result.results, args.timings);
  slsgle::summary_to_csv(summary, slsgle::summarize_results(result.results));
  fs::create_directories(args.output_dir);
  slsgle::write_text_file(args.output_dir + "/raw_results.csv", raw.str());
  slsgle::write_text_file(args.output_dir + "/summary.csv", summary.str());
  if (!result.failures.empty()) {
    std::ostringstream fails;
    slsgle::failures_to_csv(fails, result.failures);
    slsgle::write_text_file(args.output_dir + "/failures.csv", fails.str());
    std::cerr << result.failures.size() << " cell(s) failed; see failures.csv\n";
    return 2;
  }
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  slsgle::Vector y;
  slsgle::Matrix x;
  load_regression_csv(require_field<std::string>(cfg, "data_csv", "$.data_csv"), &y, &x);

  slsgle::StandardizationParams params;
  slsgle::Matrix x_std = standardize_columns(x, &params);
  const double y_mean = y.mean();
  slsgle::Vector y_c = y.array() - y_mean;

  const std::string gamma_kind =
      field_or<std::string>(cfg, "gamma", "glasso", "$.gamma");
  slsgle::LaplacianMatrix lap;
  if (gamma_kind == "glasso") {
    slsgle::GlassoConfig gcfg = glasso_from(cfg);
    gcfg.lambda0 = field_or(cfg, "lambda0", 0.1, "$.lambda0");
    lap = slsgle::laplacian_build(
        slsgle::glasso_fit(slsgle::sample_covariance(x_std), gcfg));
  } else if (gamma_kind == "identity") {
    lap = slsgle::identity_penalty(x.cols());
  } else if (gamma_kind == "zero") {
    lap = slsgle::zero_penalty(x.cols());
  } else if (gamma_kind.rfind("adjacency:", 0) == 0) {
    const std::string measure = gamma_kind.substr(10);
    slsgle::AdjacencyMeasure m;
    if (measure == "N1") m = slsgle::AdjacencyMeasure::N1;
    else if (measure == "N2") m = slsgle::AdjacencyMeasure::N2;
    else if (measure == "N3") m = slsgle::AdjacencyMeasure::N3;
    else if (measure == "N4") m = slsgle::AdjacencyMeasure::N4;
    else if (measure == "N5") m = slsgle::AdjacencyMeasure::N5;
    else throw slsgle::config_error("$.gamma", "unknown adjacency measure " + measure);
    const slsgle::Matrix corr =
        slsgle::correlation_from_covariance(slsgle::sample_covariance(x_std));
    const double r = slsgle::fisher_threshold(
        x.rows(), field_or(cfg, "fisher_alpha", 0.05, "$.fisher_alpha"), x.cols());
    lap = slsgle::laplacian_build(slsgle::adjacency_from_correlation(
        corr, m, r, field_or(cfg, "adjacency_k", 1.0, "$.adjacency_k")));
  } else {
    throw slsgle::config_error("$.gamma", "unknown kind " + gamma_kind);
  }

  slsgle::PenaltySpec pen;
  pen.lambda1 = require_field<double>(cfg, "lambda1", "$.lambda1");
  const std::string kind = field_or<std::string>(cfg, "penalty", "L1", "$.penalty");
  if (kind == "MCP") {
    pen.kind = slsgle::PenaltyKind::MCP;
    pen.mcp_gamma = field_or(cfg, "mcp_gamma", 3.0, "$.mcp_gamma");
  } else if (kind != "L1") {
    throw slsgle::config_error("$.penalty", "expected L1 or MCP");
  }
  slsgle::SolverConfig scfg = solver_from(cfg);
  scfg.lambda2 = field_or(cfg, "lambda2", 0.0, "$.lambda2");

  slsgle::RegressionProblem prob{y_c, x_std, lap};
  slsgle::FitResult fit = slsgle::coordinate_descent_fit(prob, pen, scfg);

  json out = slsgle::fit_result_json(fit);
  slsgle::Vector beta_raw = fit.beta.array() / params.scales.array();
  out["beta_raw"] = std::vector<double>(beta_raw.data(),
                                        beta_raw.data() + beta_raw.size());
  out["intercept"] = y_mean - beta_raw.dot(params.means);
  fs::create_directories(args.output_dir);
  slsgle::write_text_file(args.output_dir + "/fit.json", out.dump(2) + "\n");
  return 0;
}

int cmd_tune(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  slsgle::Vector y;
  slsgle::Matrix x;
  load_regression_csv(require_field<std::string>(cfg, "data_csv", "$.data_csv"), &y, &x);

  slsgle::GridSearchOptions opts;
  opts.glasso = glasso_from(cfg);
  opts.solver = solver_from(cfg);
  slsgle::TuningGrid grid;
  if (cfg.contains("grids")) {
    const json& grids = cfg.at("grids");
    grid.lambda0_grid = grid_field(grids, "lambda0", "$.grids.lambda0");
    grid.lambda1_grid = grid_field(grids, "lambda1", "$.grids.lambda1");
    grid.lambda2_grid = grid_field(grids, "lambda2", "$.grids.lambda2");
  }
  slsgle::StandardizationParams params;
  slsgle::Matrix x_std = standardize_columns(x, &params);
  slsgle::Vector y_c = y.array() - y.mean();
  if (grid.lambda0_grid.empty())
    grid.lambda0_grid =
        slsgle::default_lambda0_grid(slsgle::sample_covariance(x_std));
  if (grid.lambda1_grid.empty())
    grid.lambda1_grid = slsgle::default_lambda1_grid(y_c, x_std);
  if (grid.lambda2_grid.empty()) grid.lambda2_grid = slsgle::default_lambda2_grid();

  slsgle::SelectionReport report = slsgle::grid_search(y, x, grid, opts);

  fs::create_directories(args.output_dir);
  slsgle::write_text_file(args.output_dir + "/selection.json",
                          slsgle::selection_report_json(report).dump(2) + "\n");
  std::ostringstream table;
  slsgle::bic_table_to_csv(table, report.bic_table);
  slsgle::write_text_file(args.output_dir + "/bic_table.csv", table.str());
  return 0;
}

int cmd_backtest(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  slsgle::PricePanel panel;
  if (cfg.contains("synthetic")) {
    const json& syn = cfg.at("synthetic");
    slsgle::SyntheticPanelSpec spec;
    spec.n_assets = field_or<Eigen::Index>(syn, "n_assets", 30, "$.synthetic.n_assets");
    spec.n_days = field_or<Eigen::Index>(syn, "n_days", 120, "$.synthetic.n_days");
    spec.true_subset =
        field_or<Eigen::Index>(syn, "true_subset", 10, "$.synthetic.true_subset");
    spec.index_noise_sd =
        field_or(syn, "index_noise_sd", 0.0, "$.synthetic.index_noise_sd");
    spec.seed.value = field_or<std::uint64_t>(syn, "seed", 7, "$.synthetic.seed");
    if (args.seed) spec.seed.value = *args.seed;
    panel = slsgle::make_synthetic_panel(spec);
  } else {
    slsgle::LoadConfig load;
    if (cfg.contains("load")) {
      const json& l = cfg.at("load");
      load.sort_on_load = field_or(l, "sort_on_load", false, "$.load.sort_on_load");
      load.forward_fill = field_or(l, "forward_fill", false, "$.load.forward_fill");
      load.drop_bad_assets =
          field_or(l, "drop_bad_assets", false, "$.load.drop_bad_assets");
    }
    std::vector<std::string> warnings;
    panel = slsgle::load_prices(
        require_field<std::string>(cfg, "prices_csv", "$.prices_csv"), load,
        &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  }

  slsgle::BacktestConfig bt;
  bt.subset_sizes = require_field<std::vector<Eigen::Index>>(cfg, "subset_sizes",
                                                             "$.subset_sizes");
  if (cfg.contains("lambda2_grid"))
    bt.lambda2_grid =
        require_field<std::vector<double>>(cfg, "lambda2_grid", "$.lambda2_grid");
  bt.lambda0 = field_or(cfg, "lambda0", 0.1, "$.lambda0");
  if (cfg.contains("window")) {
    const json& w = cfg.at("window");
    bt.window.train_len = field_or<Eigen::Index>(w, "train", 100, "$.window.train");
    bt.window.test_len = field_or<Eigen::Index>(w, "test", 20, "$.window.test");
  }
  bt.returns_mode = field_or(cfg, "returns_mode", false, "$.returns_mode");
  bt.large_error_threshold =
      field_or(cfg, "large_error_threshold", 50.0, "$.large_error_threshold");
  bt.solver = solver_from(cfg);
  bt.glasso = glasso_from(cfg);

  slsgle::BacktestReport report = slsgle::run_backtest(panel, bt);

  fs::create_directories(args.output_dir);
  slsgle::write_text_file(args.output_dir + "/backtest.json",
                          slsgle::backtest_report_json(report).dump(2) + "\n");
  std::ostringstream windows;
  slsgle::backtest_windows_to_csv(windows, report);
  slsgle::write_text_file(args.output_dir + "/windows.csv", windows.str());
  int failed = 0;
  for (const auto& w : report.windows)
    if (!w.ok) ++failed;
  if (failed > 0) {
    std::cerr << failed << " window fit(s) failed; see backtest.json notes\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Laplacian shrinkage toolkit: precision-graph estimation,"
               " Laplacian-penalized sparse regression, simulation studies and"
               " index-tracking backtests"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", args.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", args.output_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--timings", args.timings,
                  "write measured runtimes instead of zeros");
  };

  CLI::App* simulate =
      app.add_subcommand("simulate", "run a seeded replication study");
  CLI::App* fit = app.add_subcommand("fit", "single penalized fit on a CSV");
  CLI::App* tune = app.add_subcommand("tune", "BIC grid search on a CSV");
  CLI::App* backtest =
      app.add_subcommand("backtest", "rolling index-tracking backtest");
  for (CLI::App* sub : {simulate, fit, tune, backtest}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (fit->parsed()) return cmd_fit(args);
    if (tune->parsed()) return cmd_tune(args);
    if (backtest->parsed()) return cmd_backtest(args);
  } catch (const slsgle::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
