#pragma once

#include <stdexcept>
#include <string>

namespace slsgle {

// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class dimension_mismatch : public error {
 public:
  explicit dimension_mismatch(const std::string& msg) : error(msg) {}
};

class not_psd : public error {
 public:
  explicit not_psd(const std::string& msg) : error(msg) {}
};

class constant_column : public error {
 public:
  explicit constant_column(std::size_t col)
      : error("column " + std::to_string(col) + " has zero variance"),
        column(col) {}
  std::size_t column;
};

class invalid_alpha : public error {
 public:
  explicit invalid_alpha(const std::string& msg) : error(msg) {}
};

class divergent_weight : public error {
 public:
  explicit divergent_weight(const std::string& msg) : error(msg) {}
};

class degenerate_rss : public error {
 public:
  explicit degenerate_rss(const std::string& msg) : error(msg) {}
};

class unreachable_size : public error {
 public:
  explicit unreachable_size(const std::string& msg) : error(msg) {}
};

class inactive_coefficient : public error {
 public:
  explicit inactive_coefficient(const std::string& msg) : error(msg) {}
};

class invalid_spec : public error {
 public:
  explicit invalid_spec(const std::string& msg) : error(msg) {}
};

class too_short : public error {
 public:
  explicit too_short(const std::string& msg) : error(msg) {}
};

// Lasso-path support size moved the wrong way between adjacent grid points.
// Carries the grid coordinates so study drivers can log and skip the cell.
class path_monotonicity_violation : public error {
 public:
  path_monotonicity_violation(const std::string& msg, double l0, double l1,
                              double l2)
      : error(msg), lambda0(l0), lambda1(l1), lambda2(l2) {}
  double lambda0, lambda1, lambda2;
};

class parse_error : public error {
 public:
  parse_error(const std::string& msg, std::size_t line_no)
      : error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  std::size_t line;
};

class nonpositive_price : public error {
 public:
  nonpositive_price(const std::string& asset, const std::string& date)
      : error("nonpositive price for " + asset + " at " + date) {}
};

class unsorted_dates : public error {
 public:
  explicit unsorted_dates(const std::string& msg) : error(msg) {}
};

class config_error : public error {
 public:
  config_error(const std::string& schema_path, const std::string& msg)
      : error(schema_path + ": " + msg), path(schema_path) {}
  std::string path;
};

}  // namespace slsgle
