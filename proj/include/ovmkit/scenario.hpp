#pragma once

// Scenario runner: a scenario is a JSON object naming one of the flows below
// plus its parameters; the report is key-sorted JSON (or a CSV table) that
// embeds the scenario so it can be rerun from the report alone.
//
// Exit codes: 0 every check passed, 2 some check failed (including library
// errors raised while solving), 1 the scenario itself was invalid.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ovmkit::cli {

using nlohmann::json;

inline constexpr const char* kSchema = "ovm-report/1";
inline constexpr const char* kLibraryVersion = "0.1.0";

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

/// Invalid scenario (bad JSON, unknown key, out-of-range parameter).
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  bool pass = false;
  json value;
  json limit;
};

struct Report {
  json scenario;
  json results = json::object();
  std::vector<Check> checks;
  std::vector<std::string> csv_header;
  std::vector<std::vector<json>> csv_rows;
  std::optional<json> error;
  std::optional<double> duration_ms;

  bool pass() const;
  int exit_code() const { return pass() ? kExitPass : kExitCheckFailed; }
  json to_json() const;
};

struct RunOptions {
  bool timing = false;
};

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = {"attain", "convexity", "paper_example_13", "uhl",
                                                 "singular_34", "classical", "properties"};
  return kinds;
}

/// Parses a file path, or inline JSON when the text starts with '{'.
/// Relative OVM file paths inside the scenario resolve against the file's directory.
json load_scenario(const std::string& path_or_inline);

/// Throws ScenarioError for an invalid scenario.
Report run_scenario(const json& scenario, const RunOptions& opts = {});

std::string render_json(const Report& report);
/// 17 significant digits, "." decimal separator regardless of locale.
std::string render_csv(const Report& report);

/// Writes through a temporary file in the same directory and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ovmkit::cli
