#pragma once

// Verification reports: named residual checks plus free-form metadata and
// sample tables.  Serialized as JSON (17 significant digits) or CSV.

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ustar {

struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<double> worst_point;
  bool pass = true;
  std::string note;

  /// Folds one residual at a point into the running maximum.
  void observe(double residual, const std::vector<double>& point);
  /// Sets pass from max_residual <= tolerance (NaN fails).
  void finish();
};

using MetaValue = std::variant<std::string, double, long long, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  static constexpr int kSchemaVersion = 1;

  std::string kind;
  std::vector<std::pair<std::string, MetaValue>> meta;
  std::vector<Check> checks;
  std::vector<Table> tables;

  void set(const std::string& key, MetaValue v);
  const Check* find(const std::string& name) const;
  const MetaValue* meta_value(const std::string& key) const;
  bool all_pass() const;

  std::string to_json() const;
  /// One row per check: name,max_residual,tolerance,pass,note.
  std::string to_csv() const;
};

/// Shortest exact decimal form used throughout reports ("%.17g").
std::string format_double(double v);
std::string json_escape(const std::string& s);

}  // namespace ustar
