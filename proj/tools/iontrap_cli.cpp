// Command-line front end.
//
// Exit codes: 0 all checks pass, 1 a check failed or a run aborted,
// 2 usage or configuration error.

#include "iontrap/hamiltonians.hpp"
#include "iontrap/io.hpp"
#include "iontrap/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace iontrap;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failed = 1;
constexpr int exit_usage = 2;

KeyValues parse_sets(const std::vector<std::string>& sets) {
  KeyValues kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

ScenarioConfig make_config(const std::string& scenario, const std::string& config_file,
                           const std::vector<std::string>& sets) {
  ScenarioConfig cfg(scenario);
  if (!config_file.empty()) {
    for (const auto& [k, v] : read_key_values(config_file)) {
      if (k == "scenario") {
        if (v != scenario) throw ConfigError(config_file + ": scenario '" + v + "' does not match '" + scenario + "'");
        continue;
      }
      cfg.set(k, v);
    }
  }
  cfg.set_all(parse_sets(sets));
  return cfg;
}

fs::path output_dir(const std::string& out, const std::string& leaf) {
  if (!out.empty()) return out;
  const char* root = std::getenv("IONTRAP_OUT_DIR");
  return fs::path(root && *root ? root : "iontrap_out") / leaf;
}

void print_checks(const ScenarioResult& r) {
  for (const auto& c : r.checks)
    std::printf("%s  %-40s %.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                c.threshold);
}

int cmd_list() {
  for (const auto& s : catalog()) {
    std::printf("%-18s %s\n", s.name.c_str(), s.summary.c_str());
    for (const auto& p : s.params)
      std::printf("    %-12s = %-8s %s\n", p.key.c_str(), p.default_value.c_str(), p.description.c_str());
  }
  std::printf("%zu scenarios\n", catalog().size());
  return exit_ok;
}

int cmd_run(const std::string& scenario, const std::string& config_file, const std::vector<std::string>& sets,
            const std::string& out, bool json) {
  const ScenarioConfig cfg = make_config(scenario, config_file, sets);
  const ScenarioResult r = run(cfg);
  const fs::path dir = output_dir(out, scenario);
  const auto files = write_bundle(r, dir, json);
  print_checks(r);
  std::printf("%s: %zu files written to %s (%.2f s)\n", scenario.c_str(), files.size() + 1, dir.string().c_str(),
              r.runtime_seconds);
  std::printf("%s\n", r.passed() ? "all checks passed" : "check failure");
  return r.passed() ? exit_ok : exit_failed;
}

int cmd_sweep(const std::string& scenario, const std::string& config_file, const std::vector<std::string>& sets,
              const std::string& axis, const std::vector<std::string>& values, const std::string& out) {
  const ScenarioConfig cfg = make_config(scenario, config_file, sets);
  const SweepReport report = sweep(cfg, axis, values);
  const fs::path dir = output_dir(out, scenario + "_sweep_" + axis);
  write_series(report.collate(), dir / "sweep.csv");
  bool ok = true;
  for (const auto& row : report.rows) {
    ok = ok && row.completed && row.passed;
    std::printf("%s=%-12s %s%s\n", axis.c_str(), row.value.c_str(),
                !row.completed ? "ERROR " : row.passed ? "PASS" : "FAIL", row.error.c_str());
  }
  std::printf("%zu runs collated in %s\n", report.rows.size(), (dir / "sweep.csv").string().c_str());
  return ok ? exit_ok : exit_failed;
}

int cmd_validate(const std::vector<std::string>& sets) {
  IonParams p;
  auto variant = ResonanceVariant::normal;
  std::optional<double> omega_x, omega_y;
  for (const auto& [k, v] : parse_sets(sets)) {
    auto num = [&] {
      try {
        return parse_number(v);
      } catch (const ConfigError& e) {
        throw ConfigError("key '" + k + "': " + e.what());
      }
    };
    if (k == "nu_x") p.nu_x = num();
    else if (k == "nu_y") p.nu_y = num();
    else if (k == "rabi_x") p.rabi_x = num();
    else if (k == "rabi_y") p.rabi_y = num();
    else if (k == "epsilon") p.epsilon = num();
    else if (k == "delta") p.delta = num();
    else if (k == "m") p.m = static_cast<int>(num());
    else if (k == "n") p.n = static_cast<int>(num());
    else if (k == "energy_a") p.energy_a = num();
    else if (k == "energy_b") p.energy_b = num();
    else if (k == "energy_c") p.energy_c = num();
    else if (k == "omega_x") omega_x = num();
    else if (k == "omega_y") omega_y = num();
    else if (k == "variant") {
      if (v == "normal") variant = ResonanceVariant::normal;
      else if (v == "counter") variant = ResonanceVariant::counter;
      else throw ConfigError("key 'variant' must be normal or counter");
    } else {
      throw ConfigError("unknown key '" + k + "' for validate");
    }
  }
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  LaserFrequencies lasers = resonant_lasers(p, variant);
  if (omega_x) lasers.x = *omega_x;
  if (omega_y) lasers.y = *omega_y;
  const auto report = validate_resonance(p, lasers, variant);
  std::printf("omega_x = %.17g\nomega_y = %.17g\n%s", lasers.x, lasers.y, report.to_string().c_str());
  const auto lambda = coupling_constant(p);
  std::printf("lambda_mn = %.17g\n", lambda.magnitude);
  return report.passed() ? exit_ok : exit_failed;
}

int cmd_rerun(const std::string& manifest, const std::string& out) {
  const fs::path dir = out.empty() ? fs::path(manifest).parent_path() / "rerun" : fs::path(out);
  const auto report = rerun_from_manifest(manifest, dir);
  for (const auto& m : report.mismatches) std::printf("MISMATCH %s\n", m.c_str());
  std::printf("%s\n", report.identical ? "all artifacts reproduced bit-identically" : "artifacts differ");
  return report.identical ? exit_ok : exit_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapped-ion two-mode simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(IONTRAP_VERSION));

  std::string scenario, config_file, out, axis, manifest;
  std::vector<std::string> sets, values;
  bool json = false;

  auto* list = app.add_subcommand("list", "print the scenario catalog");

  auto* run_cmd = app.add_subcommand("run", "run one scenario and write its output bundle");
  run_cmd->add_option("scenario", scenario, "scenario name")->required();
  run_cmd->add_option("--set", sets, "override key=value")->take_all();
  run_cmd->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_flag("--json", json, "also write JSON mirrors");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario over values of one numeric key");
  sweep_cmd->add_option("scenario", scenario, "scenario name")->required();
  sweep_cmd->add_option("--axis", axis, "key to vary")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->delimiter(',')->required();
  sweep_cmd->add_option("--set", sets, "override key=value")->take_all();
  sweep_cmd->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", out, "output directory");

  auto* validate_cmd = app.add_subcommand("validate", "print the resonance report for ion parameters");
  validate_cmd->add_option("--set", sets, "override key=value")->take_all();

  auto* rerun_cmd = app.add_subcommand("rerun", "re-run from a manifest and compare digests");
  rerun_cmd->add_option("manifest", manifest, "manifest.txt of an earlier run")->required()->check(CLI::ExistingFile);
  rerun_cmd->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*list) return cmd_list();
    if (*run_cmd) return cmd_run(scenario, config_file, sets, out, json);
    if (*sweep_cmd) return cmd_sweep(scenario, config_file, sets, axis, values, out);
    if (*validate_cmd) return cmd_validate(sets);
    if (*rerun_cmd) return cmd_rerun(manifest, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exit_usage;
  } catch (const TruncationError& e) {
    std::fprintf(stderr, "truncation error: %s (required dim %ld)\n", e.what(), static_cast<long>(e.required_dim()));
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_failed;
  }
  return exit_usage;
}
