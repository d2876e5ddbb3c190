// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "iontrap/io.hpp"
#include "iontrap/scenarios.hpp"

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

using namespace iontrap;
namespace fs = std::filesystem;

namespace {

struct Run {
  std::string scenario;
  bool ok = false;  // completed without throwing
  std::string error;
  ScenarioResult result;
  fs::path manifest;
};

Run execute(const std::string& scenario, const fs::path& root) {
  Run r;
  r.scenario = scenario;
  try {
    r.result = run(ScenarioConfig(scenario));
    const fs::path dir = root / scenario;
    write_bundle(r.result, dir, false);
    r.manifest = dir / "manifest.txt";
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  std::printf("  ran %-18s %s (%.2f s)\n", scenario.c_str(), r.ok ? (r.result.passed() ? "pass" : "fail") : "error",
              r.result.runtime_seconds);
  std::fflush(stdout);
  return r;
}

std::string describe(const Run& r, const std::vector<std::string>& checks) {
  if (!r.ok) return "error: " + r.error;
  std::string out;
  for (const auto& name : checks) {
    try {
      const Check& c = r.result.check(name);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s%s=%.6g %s %.6g", out.empty() ? "" : ", ", c.name.c_str(), c.value,
                    c.relation.c_str(), c.threshold);
      out += buf;
    } catch (const std::out_of_range&) {
      out += (out.empty() ? "" : ", ") + name + " missing";
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "; runtime %.2f s", r.result.runtime_seconds);
  return out + buf;
}

bool checks_pass(const Run& r, const std::vector<std::string>& checks) {
  if (!r.ok) return false;
  for (const auto& name : checks) {
    try {
      if (!r.result.check(name).pass) return false;
    } catch (const std::out_of_range&) {
      return false;
    }
  }
  return true;
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s  criterion %d: %s [%s]\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

void scenario_criterion(int id, const std::string& title, const Run& r, const std::vector<std::string>& checks,
                        double max_seconds) {
  const bool fast = r.ok && r.result.runtime_seconds < max_seconds;
  std::string detail = describe(r, checks);
  if (r.ok && !fast) detail += " exceeds limit";
  report(id, title, checks_pass(r, checks) && fast, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(root);

  std::vector<Run> runs;
  for (const char* s : {"ghz", "ghz_counter", "jcm2mode", "cat_half_revival", "downconvert2", "downconvert3",
                        "adiabatic_check", "linear_coupler"})
    runs.push_back(execute(s, root));
  auto find = [&](const std::string& name) -> const Run& {
    for (const auto& r : runs)
      if (r.scenario == name) return r;
    throw std::logic_error("no run " + name);
  };

  scenario_criterion(1, "GHZ preparation", find("ghz"), {"ghz_fidelity"}, 1.0);
  scenario_criterion(2, "counter-rotating GHZ", find("ghz_counter"), {"ghz_counter_fidelity"}, 1e300);
  scenario_criterion(3, "collapse and revival", find("jcm2mode"), {"collapse_window_std", "recurrence_peak_offset"},
                     300.0);
  scenario_criterion(4, "cat purity", find("cat_half_revival"), {"cat_two_mode_purity", "cat_x_purity", "cat_y_purity"},
                     1e300);
  scenario_criterion(5, "two-phonon down conversion", find("downconvert2"),
                     {"early_min_variance_y", "local_maxima_x", "local_maxima_y"}, 300.0);
  scenario_criterion(6, "three-phonon down conversion", find("downconvert3"), {"symmetry_score_y", "negative_volume_y"},
                     600.0);
  scenario_criterion(7, "adiabatic elimination", find("adiabatic_check"), {"frequency_relative_error", "peak_transfer"},
                     600.0);

  {
    std::size_t total = 0;
    std::vector<std::string> bad;
    for (const auto& r : runs) {
      if (!r.ok) {
        bad.push_back(r.scenario + ": " + r.error);
        continue;
      }
      for (const auto& c : r.result.checks)
        if (c.is_invariant()) {
          ++total;
          if (!c.pass) bad.push_back(r.scenario + "/" + c.name);
        }
    }
    std::string detail = std::to_string(total) + " invariant checks";
    for (const auto& b : bad) detail += "; " + b;
    report(8, "invariant suite", bad.empty() && total > 0, detail);
  }

  {
    std::size_t reproduced = 0;
    std::vector<std::string> bad;
    for (const auto& r : runs) {
      if (!r.ok) {
        bad.push_back(r.scenario + ": no manifest");
        continue;
      }
      try {
        const auto rr = rerun_from_manifest(r.manifest, root / "rerun" / r.scenario);
        if (rr.identical) ++reproduced;
        else
          for (const auto& m : rr.mismatches) bad.push_back(r.scenario + "/" + m);
      } catch (const std::exception& e) {
        bad.push_back(r.scenario + ": " + e.what());
      }
    }
    std::string detail = std::to_string(reproduced) + "/" + std::to_string(runs.size()) + " bundles bit-identical";
    for (const auto& b : bad) detail += "; " + b;
    report(9, "determinism", bad.empty(), detail);
  }

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
