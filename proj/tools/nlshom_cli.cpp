// Command-line front end: one verb per experiment family.
//
//   simulate   evolve one configuration and persist the trajectory
//   sweep      homogenization sweep over oscillation scales n
//   resonance  resonance sup-norm report with decay fit
//   alloy-mc   Monte-Carlo fourth-moment table for random alloys
//   blowup     focusing growth probe with stop-reason report
//   props      built-in property suite (exit 3 on any red check)
//
// Configs are strict JSON (unknown keys are errors, schema_version
// required). Every run that writes files also writes a manifest.json
// referencing each of them. Exit codes: 0 ok, 1 config error, 2 run
// failure, 3 property-suite failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlshom/sweep.hpp"

namespace {

using namespace nlshom;
using nlohmann::json;

int default_threads() {
  const char* env = std::getenv("NLSHOM_THREADS");
  if (!env) return 1;
  try {
    int k = std::stoi(env);
    if (k < 1) throw std::invalid_argument("nonpositive");
    return k;
  } catch (const std::exception&) {
    throw ConfigError("NLSHOM_THREADS must be a positive integer");
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_seed_override(CouplingSpec& spec, std::uint64_t seed) {
  if (auto* a = std::get_if<Alloy>(&spec)) {
    a->seed = seed;
    return;
  }
  if (auto* c = std::get_if<Convex>(&spec))
    for (auto& part : c->parts) apply_seed_override(part, seed);
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;  // overrides the config's outputs directory
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::string pick_out_dir(const CommonFlags& f, const std::string& from_config) {
  return f.out_dir.empty() ? from_config : f.out_dir;
}

int cmd_simulate(const CommonFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  json j = load_config(flags.config_path);
  detail::expect_keys(
      j, {"schema_version", "coupling", "n", "sim", "initial_data", "outputs"},
      "simulate config");
  require_schema_version(j, "simulate config");
  CouplingSpec spec =
      coupling_from_json(detail::need<json>(j, "coupling", "simulate"));
  if (flags.seed_set) apply_seed_override(spec, flags.seed);
  validate(spec);
  int n = detail::need<int>(j, "n", "simulate");
  if (n < 0) throw ConfigError("simulate: n must be >= 0 (0 runs mean level)");
  SimTemplate sim =
      sim_template_from_json(detail::need<json>(j, "sim", "simulate"));
  InitialData data =
      initial_data_from_json(detail::need<json>(j, "initial_data", "simulate"));
  std::string dir = pick_out_dir(
      flags, detail::maybe<std::string>(j, "outputs", ".", "simulate"));

  ComplexField u0 = realize(data, sim.grid);
  ComplexField g_field(sim.grid);
  if (n == 0) {
    double gbar = mean_value(spec);
    for (std::size_t k = 0; k < g_field.size(); ++k) g_field[k] = gbar;
  } else {
    require_representable(spec, n, sim.grid);
    g_field = evaluate(spec, n, sim.grid);
  }

  Trajectory traj = evolve(u0, sim.instantiate(g_field));

  std::filesystem::create_directories(dir);
  std::vector<std::string> files = write_trajectory_fields(dir, traj, "u");
  json extra = {{"times", traj.times},
                {"mass_drift", traj.mass_drift},
                {"config", j}};
  files.push_back("manifest.json");
  json manifest = make_manifest("simulate", config_hash(j), files,
                                detail::seconds_since(t0), extra);
  write_text_file(dir, "manifest.json", manifest.dump(2) + "\n");
  std::cout << "simulate: " << traj.states.size() << " states -> " << dir
            << " (mass drift " << traj.mass_drift << ")\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  json j = load_config(flags.config_path);
  SweepConfig cfg = sweep_config_from_json(j);
  if (flags.seed_set) apply_seed_override(cfg.coupling, flags.seed);
  std::string dir = pick_out_dir(flags, cfg.outputs);

  SweepResult result = run_homogenization_sweep(cfg, flags.threads);

  std::vector<double> runtimes;
  std::vector<std::string> statuses;
  bool all_ok = true;
  for (const auto& row : result.rows) {
    runtimes.push_back(row.runtime_seconds);
    statuses.push_back(row.status);
    all_ok = all_ok && row.status == "ok";
  }
  json extra = {{"summary", sweep_summary(result)},
                {"row_runtimes_seconds", runtimes},
                {"row_status", statuses}};
  std::vector<std::string> files = {"sweep.csv", "manifest.json"};
  write_text_file(dir, "sweep.csv", sweep_csv(result));
  json manifest = make_manifest("sweep", result.hash, files,
                                detail::seconds_since(t0), extra);
  write_text_file(dir, "manifest.json", manifest.dump(2) + "\n");

  std::cout << sweep_csv(result);
  if (!all_ok) {
    std::cerr << "sweep: one or more rows failed (see status column)\n";
    return 2;
  }
  return 0;
}

int cmd_resonance(const CommonFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  json j = load_config(flags.config_path);
  detail::expect_keys(
      j, {"schema_version", "coupling", "n_values", "R", "grid", "outputs"},
      "resonance config");
  require_schema_version(j, "resonance config");
  CouplingSpec spec =
      coupling_from_json(detail::need<json>(j, "coupling", "resonance"));
  if (flags.seed_set) apply_seed_override(spec, flags.seed);
  auto ns = detail::need<std::vector<int>>(j, "n_values", "resonance");
  Grid2D grid = grid_from_json(detail::need<json>(j, "grid", "resonance"));
  double R = detail::maybe(j, "R", grid.length() / 4.0, "resonance");
  std::string dir = pick_out_dir(
      flags, detail::maybe<std::string>(j, "outputs", ".", "resonance"));

  ResonanceReport report =
      run_resonance_report(spec, ns, R, grid, flags.threads);

  std::vector<std::string> files = {"resonance.csv", "resonance_summary.json",
                                    "manifest.json"};
  write_text_file(dir, "resonance.csv", resonance_csv(report));
  write_text_file(dir, "resonance_summary.json",
                  resonance_summary(report).dump(2) + "\n");
  json manifest = make_manifest("resonance", config_hash(j), files,
                                detail::seconds_since(t0),
                                {{"summary", resonance_summary(report)}});
  write_text_file(dir, "manifest.json", manifest.dump(2) + "\n");

  std::cout << resonance_csv(report) << resonance_summary(report).dump(2)
            << "\n";
  return 0;
}

int cmd_alloy_mc(const CommonFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  json j = load_config(flags.config_path);
  detail::expect_keys(j,
                      {"schema_version", "coupling", "n_values", "x0",
                       "trials", "cutoff", "grid", "outputs"},
                      "alloy-mc config");
  require_schema_version(j, "alloy-mc config");
  CouplingSpec spec =
      coupling_from_json(detail::need<json>(j, "coupling", "alloy-mc"));
  if (flags.seed_set) apply_seed_override(spec, flags.seed);
  const Alloy* alloy = std::get_if<Alloy>(&spec);
  if (!alloy) throw ConfigError("alloy-mc needs a coupling of family alloy");
  auto ns = detail::need<std::vector<int>>(j, "n_values", "alloy-mc");
  auto x0v = detail::need<std::vector<double>>(j, "x0", "alloy-mc");
  if (x0v.size() != 2) throw ConfigError("alloy-mc: x0 must be [x, y]");
  int trials = detail::need<int>(j, "trials", "alloy-mc");
  double cutoff = detail::need<double>(j, "cutoff", "alloy-mc");
  Grid2D grid = grid_from_json(detail::need<json>(j, "grid", "alloy-mc"));
  std::string dir = pick_out_dir(
      flags, detail::maybe<std::string>(j, "outputs", ".", "alloy-mc"));

  MomentReport report = run_alloy_mc(*alloy, ns, {x0v[0], x0v[1]}, trials,
                                     cutoff, grid, flags.threads);

  std::vector<std::string> files = {"moments.csv", "moments_summary.json",
                                    "manifest.json"};
  write_text_file(dir, "moments.csv", moment_csv(report));
  write_text_file(dir, "moments_summary.json",
                  moment_summary(report).dump(2) + "\n");
  json manifest = make_manifest("alloy-mc", config_hash(j), files,
                                detail::seconds_since(t0),
                                {{"summary", moment_summary(report)}});
  write_text_file(dir, "manifest.json", manifest.dump(2) + "\n");

  std::cout << moment_csv(report) << moment_summary(report).dump(2) << "\n";
  return 0;
}

int cmd_blowup(const CommonFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  json j = load_config(flags.config_path);
  detail::expect_keys(j,
                      {"schema_version", "coupling", "alpha", "n",
                       "initial_data", "grid", "dt", "horizon",
                       "sup_threshold", "outputs"},
                      "blowup config");
  require_schema_version(j, "blowup config");
  CouplingSpec spec =
      coupling_from_json(detail::need<json>(j, "coupling", "blowup"));
  if (flags.seed_set) apply_seed_override(spec, flags.seed);
  validate(spec);
  double alpha = detail::need<double>(j, "alpha", "blowup");
  int n = detail::need<int>(j, "n", "blowup");
  Grid2D grid = grid_from_json(detail::need<json>(j, "grid", "blowup"));
  double dt = detail::need<double>(j, "dt", "blowup");
  double horizon = detail::need<double>(j, "horizon", "blowup");
  double threshold = detail::need<double>(j, "sup_threshold", "blowup");
  InitialData data =
      initial_data_from_json(detail::need<json>(j, "initial_data", "blowup"));
  std::string dir = pick_out_dir(
      flags, detail::maybe<std::string>(j, "outputs", ".", "blowup"));

  ComplexField u0 = realize(data, grid);
  GrowthReport report = blowup_probe(spec, alpha, n, u0, dt, horizon, threshold);

  std::vector<std::string> files = {"growth.csv", "manifest.json"};
  write_text_file(dir, "growth.csv", growth_csv(report));
  json extra = {{"stop", to_string(report.stop)},
                {"stop_time", report.stop_time},
                {"steps", report.steps}};
  json manifest = make_manifest("blowup", config_hash(j), files,
                                detail::seconds_since(t0), extra);
  write_text_file(dir, "manifest.json", manifest.dump(2) + "\n");

  std::cout << "blowup: stop=" << to_string(report.stop)
            << " t=" << report.stop_time << " steps=" << report.steps << "\n";
  return 0;
}

int cmd_props(const CommonFlags& flags, const std::string& tag) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<PropertyResult> results =
      run_property_suite(tag == "all" ? "" : tag);
  int failures = 0;
  std::string csv = "name,pass,detail\n";
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail
              << "\n";
    csv += r.name + "," + (r.pass ? "1" : "0") + "," +
           detail::csv_escape(r.detail) + "\n";
  }
  std::cout << results.size() - failures << "/" << results.size()
            << " properties green\n";
  if (!flags.out_dir.empty()) {
    std::vector<std::string> files = {"properties.csv", "manifest.json"};
    write_text_file(flags.out_dir, "properties.csv", csv);
    json manifest =
        make_manifest("props", detail::fnv1a64(tag), files,
                      detail::seconds_since(t0), {{"failures", failures}});
    write_text_file(flags.out_dir, "manifest.json", manifest.dump(2) + "\n");
  }
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral toolkit for oscillatory-coupling NLS experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string props_tag = "all";

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", flags.config_path, "JSON config file")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out_dir,
                    "output directory (overrides config)");
    sub->add_option("--threads", flags.threads, "worker threads");
    sub->add_option("--seed", flags.seed, "override alloy seeds")
        ->each([&](const std::string&) { flags.seed_set = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "evolve one run");
  CLI::App* sweep = app.add_subcommand("sweep", "homogenization sweep");
  CLI::App* resonance = app.add_subcommand("resonance", "resonance report");
  CLI::App* alloy = app.add_subcommand("alloy-mc", "alloy moment Monte-Carlo");
  CLI::App* blowup = app.add_subcommand("blowup", "focusing growth probe");
  CLI::App* props = app.add_subcommand("props", "run property checks");
  for (CLI::App* sub : {simulate, sweep, resonance, alloy, blowup})
    add_common(sub, true);
  add_common(props, false);
  props->add_option("--tags", props_tag, "property name prefix ('all')");

  try {
    flags.threads = default_threads();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // config errors exit 1, --help exits 0
  } catch (const nlshom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (resonance->parsed()) return cmd_resonance(flags);
    if (alloy->parsed()) return cmd_alloy_mc(flags);
    if (blowup->parsed()) return cmd_blowup(flags);
    if (props->parsed()) return cmd_props(flags, props_tag);
  } catch (const nlshom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
