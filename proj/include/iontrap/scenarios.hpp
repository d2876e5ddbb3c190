#pragma once

// Canned experiments with declared parameters and pass/fail checks.
//
// A configuration is a flat set of key=value strings validated against the
// scenario's schema. Numeric values accept plain numbers and products or
// quotients involving `pi` ("pi/4", "3*pi/2", "-2.5e-3").

#include "iontrap/io.hpp"
#include "iontrap/phasespace.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace iontrap {

/// Unknown scenario or key, malformed or out-of-range value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double parse_number(const std::string& text);

struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string description;
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

const std::vector<ScenarioInfo>& catalog();
const ScenarioInfo& scenario_info(const std::string& name);

class ScenarioConfig {
 public:
  ScenarioConfig() = default;
  explicit ScenarioConfig(std::string name);

  const std::string& name() const { return name_; }
  /// Throws ConfigError naming the key when it is not in the schema.
  void set(const std::string& key, const std::string& value);
  void set_all(const KeyValues& kv);

  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// Every schema key with its effective value, in schema order.
  KeyValues resolved() const;

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< one of "<=", "<", ">=", ">"
  bool pass = false;

  static Check make(std::string name, double value, std::string relation, double threshold);
  bool is_invariant() const { return name.rfind("invariant.", 0) == 0; }
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<Check> checks;
  std::map<std::string, Series> series;
  std::map<std::string, WignerGrid> grids;
  std::map<std::string, double> scalars;
  double runtime_seconds = 0.0;  ///< wall clock, never written to artifacts

  bool passed() const;
  const Check& check(const std::string& name) const;
  std::vector<const Check*> failures() const;
};

/// Runs a scenario. Configuration errors throw ConfigError; leakage,
/// truncation and convergence failures propagate.
ScenarioResult run(const ScenarioConfig& config);

struct SweepRow {
  std::string value;
  bool completed = false;
  bool passed = false;
  std::string error;
  std::map<std::string, double> scalars;
};

struct SweepReport {
  std::string scenario;
  std::string axis;
  std::vector<SweepRow> rows;

  /// axis value, completed, passed, then every scalar (NaN where missing).
  Series collate() const;
};

/// One run per value in the given order; per-run failures are recorded.
SweepReport sweep(const ScenarioConfig& base, const std::string& axis, const std::vector<std::string>& values);

struct BundleFile {
  std::string name;
  std::string sha256;
};

/// Writes every series and grid (plus JSON mirrors when `json`) and
/// manifest.txt into `dir`. Returns the emitted files in manifest order.
std::vector<BundleFile> write_bundle(const ScenarioResult& result, const std::filesystem::path& dir,
                                     bool json = false);

/// Manifest text: scenario, version, config echo, checks, scalars, digests.
std::string manifest_text(const ScenarioResult& result, const std::vector<BundleFile>& files, bool json);

struct RerunReport {
  bool identical = false;
  std::vector<std::string> mismatches;  ///< file names whose digest differs or is missing
  ScenarioResult result;
};

/// Re-runs the configuration echoed in `manifest` into `dir` and compares
/// every listed digest.
RerunReport rerun_from_manifest(const std::filesystem::path& manifest, const std::filesystem::path& dir);

std::string version_string();

}  // namespace iontrap
