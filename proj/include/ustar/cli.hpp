#pragma once

// Batch commands behind the command-line tool: gallery listing from the
// manifest, verification suites, the QK -> U*(2m) transform and holonomy
// surveys. Each command returns a Report; the tool maps it to exit codes
// 0 (pass), 1 (check failure) and 2 (usage or configuration error).

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ustar/report.hpp"

namespace ustar {

/// Malformed manifest, constants file or option value (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SuiteConfig {
  std::string entry;
  int samples = 20;
  std::uint64_t seed = 1;
  std::optional<double> tol;        // overrides every check tolerance
  std::vector<std::string> checks;  // empty: all checks of the entry
  int loops = 200;
  std::string constants_path;       // regression constants (JSON)
};

struct ManifestEntry {
  std::string id;
  std::string chart;
  int dim = 0;
  std::string domain;
  std::vector<std::string> invariants;
};

/// Parses and validates a manifest; throws ConfigError with a diagnostic.
std::vector<ManifestEntry> load_manifest(const std::string& path);
std::vector<ManifestEntry> parse_manifest(const std::string& text);
/// Cross-checks every manifest row against the built-in gallery.
void validate_manifest(const std::vector<ManifestEntry>& entries);
std::string gallery_list_json(const std::vector<ManifestEntry>& entries);
std::string gallery_list_csv(const std::vector<ManifestEntry>& entries);

/// Regression constants by name; throws ConfigError when unreadable.
std::map<std::string, double> load_constants(const std::string& path);

/// Names of the checks run by `verify` for an entry.
std::vector<std::string> available_checks(const std::string& entry_id);

Report cmd_verify(const SuiteConfig& cfg);
Report cmd_transform(const SuiteConfig& cfg);
Report cmd_holonomy(const SuiteConfig& cfg);

/// Serialises in "json" or "csv"; throws ConfigError for other formats.
std::string render(const Report& r, const std::string& format);

}  // namespace ustar
