#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "nlshom/sweep.hpp"
#include "test_helpers.hpp"

using namespace nlshom;
namespace fs = std::filesystem;

namespace {

CouplingSpec one_plus_cos() {
  TrigPoly p;
  p.coeffs[{0, 0}] = 1.0;
  p.coeffs[{1, 0}] = 0.5;
  p.coeffs[{-1, 0}] = 0.5;
  return p;
}

SweepConfig tiny_sweep_config() {
  return SweepConfig{one_plus_cos(),
                     {2, 4},
                     SimTemplate{Grid2D(64, 16.0 * pi), 1e-3, 0.02, 5},
                     GaussianData{1.0, 1.0},
                     "."};
}

}  // namespace

TEST_CASE("sweep configs round-trip and reject bad input", "[harness]") {
  SweepConfig cfg = tiny_sweep_config();
  nlohmann::json j = sweep_config_to_json(cfg);
  SweepConfig back = sweep_config_from_json(j);
  CHECK(back.n_values == cfg.n_values);
  CHECK(back.sim.grid == cfg.sim.grid);
  CHECK(back.sim.dt == cfg.sim.dt);
  CHECK(config_hash(sweep_config_to_json(back)) ==
        config_hash(sweep_config_to_json(cfg)));

  SECTION("unknown keys are errors") {
    nlohmann::json bad = j;
    bad["n_valuess"] = {2, 4};
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SECTION("schema version is pinned") {
    nlohmann::json bad = j;
    bad["schema_version"] = 2;
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SECTION("scales must ascend") {
    nlohmann::json bad = j;
    bad["n_values"] = {4, 2};
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SECTION("unrepresentable scales fail at ingestion") {
    nlohmann::json bad = j;
    bad["n_values"] = {2, 64};  // 64 is beyond the 64-point grid's band
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SECTION("initial data needs exactly one source") {
    nlohmann::json bad = j;
    bad["initial_data"] = {{"gaussian", {{"amplitude", 1.0}}},
                           {"field_file", "u.field"}};
    CHECK_THROWS_AS(sweep_config_from_json(bad), ConfigError);
  }
  SECTION("hash tracks content") {
    nlohmann::json other = j;
    other["n_values"] = {2, 8};
    CHECK(config_hash(other) != config_hash(j));
  }
}

TEST_CASE("field-file initial data feeds a run", "[harness]") {
  Grid2D g(64, 16.0 * pi);
  fs::path dir = fs::temp_directory_path() / "nlshom_harness_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ComplexField u0 = make_gaussian(g, 0.9);
  std::string path = (dir / "u0.field").string();
  write_field(path, u0, "u0", 0.0);

  ComplexField back = realize(FieldFileData{path}, g);
  back -= u0;
  CHECK(back.max_abs() == 0.0);

  Grid2D other(128, 16.0 * pi);
  CHECK_THROWS_AS(realize(FieldFileData{path}, other), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("constant coupling sweeps are exact zeros", "[harness]") {
  SweepConfig cfg = tiny_sweep_config();
  TrigPoly flat;
  flat.coeffs[{0, 0}] = 1.0;
  cfg.coupling = flat;

  SweepResult r = run_homogenization_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.status == "ok");
    CHECK(row.l4_diff <= 1e-10);
    CHECK(row.duhamel_error == 0.0);
    CHECK(row.resonance_sup <= 1e-13);
  }
  CHECK(r.mass == Catch::Approx(pi).epsilon(1e-6));  // A^2 pi for A = 1
  CHECK(r.l4_norm > 0.0);
  CHECK(r.strichartz >= r.l4_norm);
}

TEST_CASE("oscillatory sweeps populate every column", "[harness]") {
  SweepConfig cfg = tiny_sweep_config();
  SweepResult r = run_homogenization_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(row.status == "ok");
    CHECK(row.l4_diff > 0.0);
    CHECK(row.duhamel_error > 0.0);
    CHECK(row.resonance_sup > 0.0);
  }
  // closed form for the cosine deviation at scale n
  CHECK(r.rows[0].resonance_sup == Catch::Approx(1.0 / 5.0).margin(1e-10));
  CHECK(r.rows[1].resonance_sup == Catch::Approx(1.0 / 17.0).margin(1e-10));

  std::string csv = sweep_csv(r);
  CHECK(csv.rfind("n,l4_diff,duhamel_error,resonance_sup,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("a failing row never takes down the sweep", "[harness]") {
  SweepConfig cfg = tiny_sweep_config();
  cfg.n_values = {2, 64};  // second scale violates the band limit at run time
  SweepResult r = run_homogenization_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].status == "ok");
  CHECK(r.rows[0].l4_diff > 0.0);
  CHECK(r.rows[1].status != "ok");
  CHECK(std::isnan(r.rows[1].l4_diff));

  std::string csv = sweep_csv(r);
  CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("sweeps reproduce byte-for-byte across thread counts",
          "[harness][determinism]") {
  SweepConfig cfg = tiny_sweep_config();
  SweepResult a = run_homogenization_sweep(cfg, 1);
  SweepResult b = run_homogenization_sweep(cfg, 2);
  SweepResult c = run_homogenization_sweep(cfg, 4);
  CHECK(sweep_csv(a) == sweep_csv(b));
  CHECK(sweep_csv(a) == sweep_csv(c));
  CHECK(a.hash == b.hash);
}

TEST_CASE("resonance reports carry rows, fit, and verdicts", "[harness]") {
  TrigPoly cosine;
  cosine.coeffs[{1, 0}] = 0.5;
  cosine.coeffs[{-1, 0}] = 0.5;
  Grid2D g(256, 16.0 * pi);
  ResonanceReport rep =
      run_resonance_report(cosine, {2, 4, 8, 16}, 4.0 * pi, g, 2);

  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].sup == Catch::Approx(1.0 / 5.0).margin(1e-10));
  CHECK(rep.rows[3].sup == Catch::Approx(1.0 / 257.0).margin(1e-10));
  REQUIRE(rep.fit.has_value());
  // OLS slope of log(1/(n^2+1)) on log n over {2,4,8,16}
  CHECK(rep.fit->slope == Catch::Approx(-1.8986).margin(2e-3));
  CHECK(rep.uniform_bounded);
  CHECK(rep.uniform_ratio <= 1.0 + 1e-9);

  std::string csv = resonance_csv(rep);
  CHECK(csv.rfind("n,sup,grad_sup\n", 0) == 0);
  nlohmann::json summary = resonance_summary(rep);
  CHECK(summary.contains("slope"));
  CHECK(summary.contains("uniform_bounded"));

  SECTION("flat data yields no fit") {
    TrigPoly flat;
    flat.coeffs[{0, 0}] = 1.0;
    ResonanceReport rf = run_resonance_report(flat, {2, 4}, 4.0 * pi, g);
    CHECK_FALSE(rf.fit.has_value());
    CHECK(resonance_summary(rf)["slope"].is_null());
  }
}

TEST_CASE("alloy moment tables respect the fourth-moment bound", "[harness]") {
  Alloy alloy;
  alloy.bump = {AlloyBump::Kind::gaussian, 1.0, 0.5, 1.0, 1.0};
  alloy.law = {AlloyLaw::Kind::rademacher, 0.0, 1.0};
  alloy.seed = 7;
  Grid2D g(64, 8.0);

  MomentReport rep = run_alloy_mc(alloy, {2, 4}, {0.0, 0.0}, 120, 2.0, g, 2);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    CHECK(row.estimate > 0.0);
    CHECK(row.stderr_ > 0.0);
    CHECK(row.bound > 0.0);
    CHECK(row.within_bound);
  }
  CHECK(rep.rows[1].estimate < rep.rows[0].estimate);
  REQUIRE(rep.fit.has_value());
  CHECK(rep.fit->slope < 0.0);

  std::string csv = moment_csv(rep);
  CHECK(csv.rfind("n,estimate,stderr,bound,within_bound\n", 0) == 0);
  CHECK(moment_summary(rep)["all_within_bound"].get<bool>());
}

TEST_CASE("manifests reference every emitted file", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "nlshom_manifest";
  fs::remove_all(dir);

  Grid2D g(32, 8.0 * pi);
  Trajectory traj;
  for (int s = 0; s <= 2; ++s) {
    traj.times.push_back(0.01 * s);
    traj.states.push_back(make_gaussian(g, 1.0));
  }
  auto files = write_trajectory_fields(dir.string(), traj, "u");
  REQUIRE(files.size() == 3);
  CHECK(files[0] == "u_000000.field");

  files.push_back("manifest.json");
  nlohmann::json m = make_manifest("simulate", 42, files, 0.5,
                                   {{"times", traj.times}});
  write_text_file(dir.string(), "manifest.json", m.dump(2) + "\n");

  // completeness: each file on disk appears in the manifest exactly once
  std::set<std::string> on_disk;
  for (const auto& entry : fs::directory_iterator(dir))
    on_disk.insert(entry.path().filename().string());
  std::set<std::string> listed(m["outputs"].begin(), m["outputs"].end());
  CHECK(on_disk == listed);
  CHECK(m["outputs"].size() == listed.size());  // no duplicates
  CHECK(m["versions"].contains("fftw"));

  NamedField nf = read_field((dir / files[1]).string());
  CHECK(nf.time == 0.01);
  fs::remove_all(dir);
}

TEST_CASE("property suite is green and filterable", "[harness][properties]") {
  auto all = run_property_suite();
  CHECK(all.size() >= 10);
  for (const auto& r : all) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.pass);
  }

  auto spectral = run_property_suite("spectral");
  CHECK(spectral.size() >= 3);
  for (const auto& r : spectral) CHECK(r.name.rfind("spectral", 0) == 0);

  CHECK_THROWS_AS(run_property_suite("no_such_prefix"), ConfigError);
}
