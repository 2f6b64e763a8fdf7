#include "ustar/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ustar {

void Check::observe(double residual, const std::vector<double>& point) {
  if (std::isnan(max_residual)) return;
  if (std::isnan(residual) || worst_point.empty() || residual > max_residual) {
    max_residual = std::isnan(residual) ? residual : std::max(max_residual, residual);
    worst_point = point;
  }
}

void Check::finish() { pass = !std::isnan(max_residual) && max_residual <= tolerance; }

void Report::set(const std::string& key, MetaValue v) {
  for (auto& [k, val] : meta) {
    if (k == key) {
      val = std::move(v);
      return;
    }
  }
  meta.emplace_back(key, std::move(v));
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const MetaValue* Report::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return &v;
  return nullptr;
}

bool Report::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

namespace {

// JSON has no NaN/Infinity literals; those are written as strings.
std::string json_number(double v) {
  const std::string s = format_double(v);
  return std::isfinite(v) ? s : "\"" + s + "\"";
}

std::string json_value(const MetaValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + json_escape(*s) + "\"";
  if (const auto* d = std::get_if<double>(&v)) return json_number(*d);
  if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  return std::get<bool>(v) ? "true" : "false";
}

std::string json_array(const std::vector<double>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + json_number(xs[i]);
  return out + "]";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

std::string Report::to_json() const {
  std::ostringstream os;
  os << "{\n  \"schema_version\": " << kSchemaVersion << ",\n";
  os << "  \"kind\": \"" << json_escape(kind) << "\",\n";
  for (const auto& [k, v] : meta) os << "  \"" << json_escape(k) << "\": " << json_value(v) << ",\n";
  os << "  \"pass\": " << (all_pass() ? "true" : "false") << ",\n";
  os << "  \"checks\": [";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& c = checks[i];
    os << (i ? "," : "") << "\n    {\"check_name\": \"" << json_escape(c.name)
       << "\", \"max_residual\": " << json_number(c.max_residual)
       << ", \"tolerance\": " << json_number(c.tolerance)
       << ", \"worst_point\": " << json_array(c.worst_point)
       << ", \"pass\": " << (c.pass ? "true" : "false");
    if (!c.note.empty()) os << ", \"note\": \"" << json_escape(c.note) << "\"";
    os << "}";
  }
  os << (checks.empty() ? "]" : "\n  ]");
  if (!tables.empty()) {
    os << ",\n  \"tables\": [";
    for (std::size_t t = 0; t < tables.size(); ++t) {
      const Table& tb = tables[t];
      os << (t ? "," : "") << "\n    {\"name\": \"" << json_escape(tb.name) << "\", \"columns\": [";
      for (std::size_t c = 0; c < tb.columns.size(); ++c) {
        os << (c ? ", " : "") << "\"" << json_escape(tb.columns[c]) << "\"";
      }
      os << "], \"rows\": [";
      for (std::size_t r = 0; r < tb.rows.size(); ++r) {
        os << (r ? "," : "") << "\n      " << json_array(tb.rows[r]);
      }
      os << (tb.rows.empty() ? "]}" : "\n    ]}");
    }
    os << "\n  ]";
  }
  os << "\n}\n";
  return os.str();
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "check_name,max_residual,tolerance,pass,note\n";
  for (const auto& c : checks) {
    os << csv_field(c.name) << "," << format_double(c.max_residual) << ","
       << format_double(c.tolerance) << "," << (c.pass ? "true" : "false") << ","
       << csv_field(c.note) << "\n";
  }
  return os.str();
}

}  // namespace ustar
