#include "iontrap/io.hpp"
#include "iontrap/scenarios.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <limits>

using namespace iontrap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "iontrap_test_io" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

WignerGrid sample_grid() {
  WignerGrid g;
  g.re_axis = RealVector::LinSpaced(5, -1.0, 1.0);
  g.im_axis = RealVector::LinSpaced(3, -0.5, 0.5);
  g.values = RealMatrix(3, 5);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 5; ++j) g.values(i, j) = std::sin(0.1 + i * 1.7 + j * 0.3) / 3.0;
  return g;
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, M_PI, 0.0})
    CHECK(parse_double(format_double(v)) == v);
  CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
  CHECK(std::isinf(parse_double("inf")));
  CHECK_THROWS_AS(parse_double("1.0x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
}

TEST_CASE("series columns") {
  Series s;
  s.add("t", "s", {0.0, 0.5}).add("p", "1", {1.0, 0.25});
  CHECK(s.rows() == 2);
  CHECK(s.column("p").values[1] == 0.25);
  CHECK_THROWS_AS(s.column("q"), std::out_of_range);
  CHECK_THROWS_AS(s.add("bad", "1", {1.0}), std::invalid_argument);
  const std::string csv = series_csv(s);
  CHECK(csv.rfind("t[s],p[1]\n", 0) == 0);
}

TEST_CASE("series files round-trip bit-exactly") {
  const auto dir = scratch("series");
  Series s;
  s.add("t", "1/lambda", {0.0, 1.0 / 7.0, 2.0 / 7.0}).add("x", "quanta", {1e-17, std::sqrt(2.0), -0.0});
  write_series(s, dir / "s.csv");
  const Series back = read_series(dir / "s.csv");
  REQUIRE(back.columns.size() == 2);
  CHECK(back.columns[0].unit == "1/lambda");
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t k = 0; k < 3; ++k) CHECK(back.columns[c].values[k] == s.columns[c].values[k]);

  Series empty;
  empty.add("t", "1", {});
  write_series(empty, dir / "empty.csv");
  CHECK(read_file(dir / "empty.csv") == "t[1]\n");
  CHECK(read_series(dir / "empty.csv").rows() == 0);
  CHECK_THROWS_AS(read_series(dir / "missing.csv"), IoError);
}

TEST_CASE("grid files round-trip") {
  const auto dir = scratch("grid");
  const WignerGrid g = sample_grid();
  write_grid(g, dir / "g.csv");
  const WignerGrid back = read_grid(dir / "g.csv");
  CHECK(back.values == g.values);
  CHECK(back.re_axis == g.re_axis);
  CHECK(back.im_axis == g.im_axis);
  CHECK(std::abs(back.riemann_sum() - g.riemann_sum()) <= 1e-15);
  write_atomic(dir / "broken.csv", "re_axis,0,1\nvalues\n");
  CHECK_THROWS_AS(read_grid(dir / "broken.csv"), IoError);
}

TEST_CASE("JSON mirrors") {
  Series s;
  s.add("t", "1", {0.0, 0.1}).add("n", "quanta", {2.0, 1.0 / 3.0});
  const auto js = nlohmann::json::parse(series_json(s));
  REQUIRE(js["columns"].size() == 2);
  CHECK(js["columns"][1]["name"] == "n");
  CHECK(js["columns"][1]["values"][1].get<double>() == 1.0 / 3.0);
  const WignerGrid g = sample_grid();
  const auto jg = nlohmann::json::parse(grid_json(g));
  CHECK(jg["values"].size() == 3);
  CHECK(jg["values"][2][4].get<double>() == g.values(2, 4));
}

TEST_CASE("atomic writes leave no temporaries") {
  const auto dir = scratch("atomic");
  write_atomic(dir / "sub" / "a.txt", "first");
  write_atomic(dir / "sub" / "a.txt", "second");
  CHECK(read_file(dir / "sub" / "a.txt") == "second");
  std::size_t entries = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) {
    ++entries;
    CHECK(e.path().extension() != ".tmp");
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir / "nothing"), IoError);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = scratch("sha");
  write_atomic(dir / "abc", "abc");
  CHECK(sha256_file(dir / "abc") == sha256_hex("abc"));
}

TEST_CASE("key=value text") {
  const auto kv = parse_key_values("# comment\n  lambda = 1.5 \n\nt=pi/4\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0].first == "lambda");
  CHECK(kv[0].second == "1.5");
  CHECK(kv[1].second == "pi/4");
  CHECK(parse_key_values(key_values_text(kv)) == kv);
  CHECK_THROWS_AS(parse_key_values("novalue\n"), IoError);
  CHECK_THROWS_AS(parse_key_values("=3\n"), IoError);
}

TEST_CASE("bundle manifest reruns identically") {
  const auto dir = scratch("bundle");
  ScenarioConfig cfg("ghz");
  cfg.set("samples", "11");
  const auto result = run(cfg);
  const auto files = write_bundle(result, dir, true);
  REQUIRE_FALSE(files.empty());
  for (const auto& f : files) CHECK(sha256_file(dir / f.name) == f.sha256);
  const std::string manifest = read_file(dir / "manifest.txt");
  CHECK(manifest.find("scenario=ghz\n") != std::string::npos);
  CHECK(manifest.find("config.samples=11\n") != std::string::npos);
  CHECK(manifest.find("passed=1") != std::string::npos);
  CHECK(fs::exists(dir / "populations.json"));
  const auto report = rerun_from_manifest(dir / "manifest.txt", dir / "rerun");
  CHECK(report.identical);
  CHECK(report.mismatches.empty());

  // A tampered artifact is reported by name.
  std::string text = manifest;
  const std::string key = "file.populations.csv=";
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  char& digit = text[pos + key.size()];
  digit = digit == '0' ? '1' : '0';
  write_atomic(dir / "tampered" / "manifest.txt", text);
  const auto bad = rerun_from_manifest(dir / "tampered" / "manifest.txt", dir / "tampered" / "out");
  CHECK_FALSE(bad.identical);
  REQUIRE(bad.mismatches.size() == 1);
  CHECK(bad.mismatches[0] == "populations.csv");
}
