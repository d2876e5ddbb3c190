#include "iontrap/scenarios.hpp"

#include <doctest.h>

#include <cmath>

using namespace iontrap;

TEST_CASE("number parsing") {
  CHECK(parse_number("2.5") == 2.5);
  CHECK(parse_number("-2.5e-3") == -2.5e-3);
  CHECK(parse_number("pi") == doctest::Approx(M_PI));
  CHECK(parse_number("pi/4") == doctest::Approx(M_PI / 4));
  CHECK(parse_number("3*pi/2") == doctest::Approx(1.5 * M_PI));
  CHECK(parse_number("-pi") == doctest::Approx(-M_PI));
  CHECK_THROWS_AS(parse_number(""), ConfigError);
  CHECK_THROWS_AS(parse_number("pie"), ConfigError);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
}

TEST_CASE("catalog and schema") {
  CHECK(catalog().size() == 8);
  for (const char* name : {"ghz", "ghz_counter", "jcm2mode", "cat_half_revival", "downconvert2", "downconvert3",
                           "adiabatic_check", "linear_coupler"})
    CHECK(scenario_info(name).name == name);
  CHECK_THROWS_AS(scenario_info("nope"), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig("nope"), ConfigError);
}

TEST_CASE("config values") {
  ScenarioConfig cfg("ghz");
  CHECK(cfg.number("t") == doctest::Approx(M_PI / 4));
  cfg.set("t", "pi/8");
  CHECK(cfg.number("t") == doctest::Approx(M_PI / 8));
  try {
    cfg.set("bogus", "1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  cfg.set("dim_x", "2.5");
  CHECK_THROWS_AS(cfg.integer("dim_x"), ConfigError);
  const auto resolved = cfg.resolved();
  CHECK(resolved.size() == scenario_info("ghz").params.size());
  CHECK(resolved.front().first == scenario_info("ghz").params.front().key);
}

TEST_CASE("checks") {
  CHECK(Check::make("x", 1.0, "<=", 1.0).pass);
  CHECK_FALSE(Check::make("x", 1.0, "<", 1.0).pass);
  CHECK_FALSE(Check::make("x", std::nan(""), ">=", 0.0).pass);
  CHECK(Check::make("invariant.unitarity", 0.0, "<=", 1e-10).is_invariant());
  CHECK_THROWS_AS(Check::make("x", 1.0, "==", 1.0), std::invalid_argument);
}

TEST_CASE("ghz passes at the quarter period and fails at t = 0") {
  ScenarioConfig cfg("ghz");
  const auto ok = run(cfg);
  CHECK(ok.passed());
  CHECK(ok.check("ghz_fidelity").value >= 1.0 - 1e-8);
  for (const auto& c : ok.checks) CHECK_MESSAGE(c.pass, c.name);
  cfg.set("t", "0");
  const auto bad = run(cfg);
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.failures().size() == 1);
  CHECK(bad.failures().front()->name == "ghz_fidelity");
  CHECK_THROWS_AS(ok.check("missing"), std::out_of_range);
}

TEST_CASE("ghz_counter orientation mismatch fails") {
  ScenarioConfig cfg("ghz_counter");
  CHECK(run(cfg).passed());
  cfg.set("orientation", "a_to_b");
  const auto r = run(cfg);
  CHECK_FALSE(r.check("ghz_counter_fidelity").pass);
  cfg.set("orientation", "sideways");
  CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("linear coupler") {
  const auto r = run(ScenarioConfig("linear_coupler"));
  CHECK(r.passed());
  CHECK(r.series.at("dynamics").column("transfer_fidelity").values.back() >= 1.0 - 1e-8);
}

TEST_CASE("down conversion from the vacuum stays put") {
  ScenarioConfig cfg("downconvert2");
  cfg.set("beta", "0");
  cfg.set("samples", "31");
  cfg.set("grid_points", "21");
  cfg.set("dim_x", "4");
  cfg.set("dim_y", "6");
  const auto r = run(cfg);
  for (double n : r.series.at("dynamics").column("n_y").values) CHECK(std::abs(n) < 1e-14);
}

TEST_CASE("invalid values are configuration errors") {
  ScenarioConfig cfg("ghz");
  cfg.set("lambda", "-1");
  CHECK_THROWS_AS(run(cfg), ConfigError);
  ScenarioConfig dims("ghz");
  dims.set("dim_x", "0");
  CHECK_THROWS_AS(run(dims), ConfigError);
}

TEST_CASE("runs are deterministic") {
  ScenarioConfig cfg("cat_half_revival");
  cfg.set("grid_points", "41");
  const auto a = run(cfg);
  const auto b = run(cfg);
  REQUIRE(a.grids.size() == b.grids.size());
  for (const auto& [name, g] : a.grids) CHECK(g.values == b.grids.at(name).values);
  for (const auto& [name, v] : a.scalars) CHECK(v == b.scalars.at(name));
}

TEST_CASE("sweeps") {
  ScenarioConfig cfg("ghz");
  cfg.set("samples", "5");
  const auto report = sweep(cfg, "t", {"0", "pi/8", "pi/4"});
  REQUIRE(report.rows.size() == 3);
  const auto table = report.collate();
  const auto& fid = table.column("final_fidelity").values;
  CHECK(fid[0] < fid[1]);
  CHECK(fid[1] < fid[2]);
  CHECK(table.column("passed").values == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(table.column("t").values[2] == doctest::Approx(M_PI / 4));

  CHECK(sweep(cfg, "t", {}).rows.empty());
  CHECK(sweep(cfg, "t", {}).collate().rows() == 0);

  // A run that throws is recorded, not propagated.
  const auto mixed = sweep(cfg, "dim_x", {"4", "1"});
  REQUIRE(mixed.rows.size() == 2);
  CHECK(mixed.rows[0].completed);
  CHECK_FALSE(mixed.rows[1].completed);
  CHECK_FALSE(mixed.rows[1].error.empty());
  CHECK(std::isnan(mixed.collate().column("final_fidelity").values[1]));

  CHECK_THROWS_AS(sweep(cfg, "bogus", {"1"}), ConfigError);
  CHECK_THROWS_AS(sweep(ScenarioConfig("ghz_counter"), "orientation", {"a_to_b"}), ConfigError);
  CHECK_THROWS_AS(sweep(cfg, "t", {"abc"}), ConfigError);
}
