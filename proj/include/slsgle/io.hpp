#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slsgle/glasso.hpp"
#include "slsgle/laplacian.hpp"
#include "slsgle/linalg.hpp"
#include "slsgle/model_selection.hpp"
#include "slsgle/simlab.hpp"
#include "slsgle/solver.hpp"
#include "slsgle/tracker.hpp"

namespace slsgle {

using json = nlohmann::json;

// Shortest round-trip decimal form; locale-independent, so output bytes are
// reproducible.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Dense CSV, row-major, header row of column indices.
inline void matrix_to_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out << (j ? "," : "") << j;
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
}

// {"edges":[{"i":...,"j":...,"w":...}]} over the strictly-upper triangle.
inline json edge_list_json(const Matrix& m) {
  json edges = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        edges.push_back({{"i", i}, {"j", j}, {"w", m(i, j)}});
  return json{{"edges", edges}};
}

inline json fit_result_json(const FitResult& fit) {
  json j;
  j["lambda1"] = fit.lambda1;
  j["lambda2"] = fit.lambda2;
  j["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["active_set"] = fit.active_set;
  j["objective"] = fit.objective;
  j["kkt_residual"] = fit.kkt_residual;
  j["converged"] = fit.converged;
  return j;
}

inline json selection_report_json(const SelectionReport& report) {
  json j;
  j["best"] = {{"lambda0", report.best_lambda0},
               {"lambda1", report.best_lambda1},
               {"lambda2", report.best_lambda2}};
  j["fit"] = fit_result_json(report.fit);
  j["precision_edges"] = edge_list_json(report.precision.theta);
  j["standardization"] = {
      {"means", std::vector<double>(report.standardization.means.data(),
                                    report.standardization.means.data() +
                                        report.standardization.means.size())},
      {"scales", std::vector<double>(report.standardization.scales.data(),
                                     report.standardization.scales.data() +
                                         report.standardization.scales.size())},
      {"y_mean", report.y_mean}};
  j["cells"] = report.bic_table.size();
  return j;
}

inline void bic_table_to_csv(std::ostream& out,
                             const std::vector<BicRecord>& table) {
  out << "lambda0,lambda1,lambda2,df,rss,bic\n";
  for (const BicRecord& r : table)
    out << format_double(r.lambda0) << "," << format_double(r.lambda1) << ","
        << format_double(r.lambda2) << "," << r.df << ","
        << format_double(r.rss) << "," << format_double(r.bic) << "\n";
}

// emit_runtime=false writes a 0 in the runtime column so output bytes do not
// depend on wall-clock timings.
inline void raw_results_to_csv(std::ostream& out,
                               const std::vector<ReplicationResult>& results,
                               bool emit_runtime = false) {
  out << "method,n,replicate,l2_error,mse,support_recovered,runtime_ms\n";
  for (const ReplicationResult& r : results)
    out << r.method << "," << r.n << "," << r.replicate << ","
        << format_double(r.l2_error) << "," << format_double(r.mse) << ","
        << (r.support_recovered ? 1 : 0) << ","
        << (emit_runtime ? r.runtime_ms : 0) << "\n";
}

inline void summary_to_csv(std::ostream& out,
                           const std::vector<MetricsSummary>& summary) {
  out << "method,n,replicates,l2_mean,l2_se,mse_mean,mse_se\n";
  for (const MetricsSummary& s : summary)
    out << s.method << "," << s.n << "," << s.replicates << ","
        << format_double(s.l2_mean) << "," << format_double(s.l2_se) << ","
        << format_double(s.mse_mean) << "," << format_double(s.mse_se) << "\n";
}

inline void failures_to_csv(std::ostream& out,
                            const std::vector<CellFailure>& failures) {
  out << "method,n,replicate,reason\n";
  for (const CellFailure& f : failures) {
    std::string reason = f.reason;
    for (char& c : reason)
      if (c == ',' || c == '\n') c = ';';
    out << f.method << "," << f.n << "," << f.replicate << "," << reason << "\n";
  }
}

inline std::string join_pipe(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += "|";
    out += ids[i];
  }
  return out;
}

inline void backtest_windows_to_csv(std::ostream& out,
                                    const BacktestReport& report) {
  out << "window_start,window_end,m,lambda1,lambda2,ate,selected_ids\n";
  for (const WindowReport& w : report.windows) {
    if (!w.ok) continue;
    out << w.test_start << "," << w.test_end << "," << w.m << ","
        << format_double(w.lambda1) << "," << format_double(w.lambda2) << ","
        << format_double(w.ate) << "," << join_pipe(w.selected_ids) << "\n";
  }
}

inline json backtest_report_json(const BacktestReport& report) {
  json windows = json::array();
  for (const WindowReport& w : report.windows) {
    json jw;
    jw["window_index"] = w.window_index;
    jw["m"] = w.m;
    jw["train_start"] = w.train_start;
    jw["train_end"] = w.train_end;
    jw["test_start"] = w.test_start;
    jw["test_end"] = w.test_end;
    jw["ok"] = w.ok;
    if (!w.ok) {
      jw["note"] = w.note;
    } else {
      jw["lambda1"] = w.lambda1;
      jw["lambda2"] = w.lambda2;
      jw["ate"] = w.ate;
      jw["selected_ids"] = w.selected_ids;
      jw["predicted"] = std::vector<double>(
          w.predicted.data(), w.predicted.data() + w.predicted.size());
      jw["realized"] = std::vector<double>(
          w.realized.data(), w.realized.data() + w.realized.size());
      jw["large_error_at"] = w.large_error_at;
    }
    windows.push_back(std::move(jw));
  }
  json by_size = json::array();
  for (const auto& [m, ate] : report.ate_by_size)
    by_size.push_back({{"m", m}, {"ate", ate}});
  return json{{"n_windows", report.n_windows},
              {"windows", windows},
              {"ate_by_size", by_size}};
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path);
  out << body;
}

}  // namespace slsgle
