#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiltalloc/config.hpp"
#include "tiltalloc/suite.hpp"
#include "tiltalloc/trace.hpp"
#include "tiltalloc/trim.hpp"
#include "tiltalloc/wrench_space.hpp"

namespace {

using namespace tiltalloc;

constexpr int kExitOk = 0;
constexpr int kExitCrash = 1;   // a crash-flagged run under --strict
constexpr int kExitConfig = 2;  // malformed config / usage

std::string default_out_dir() {
  const char* env = std::getenv("TILTALLOC_OUT");
  return env && *env ? env : ".";
}

std::vector<alloc::FailureInfo> pinned_failures(const sim::Scenario& sc) {
  std::vector<alloc::FailureInfo> out;
  for (const sim::FailureSpec& f : sc.failures) out.push_back({f.index, f.value});
  return out;
}

void print_summary(const sim::RunSummary& s) {
  std::printf("scenario %-28s %s\n", s.name.c_str(),
              s.crash ? "CRASHED" : "completed");
  if (s.crash) std::printf("  crash_time          = %.3f s\n", s.crash_time);
  if (s.time_to_converge >= 0.0)
    std::printf("  time_to_converge    = %.3f s\n", s.time_to_converge);
  std::printf("  max_attitude_dev    = %.3f deg\n", s.max_attitude_dev);
  std::printf("  altitude_variation  = %.3f m\n", s.altitude_variation);
  std::printf("  saturation_count    = %d\n", s.saturation_count);
  if (s.max_cross_track > 0.0 || s.max_heading_dev > 0.0) {
    std::printf("  max_cross_track     = %.3f m\n", s.max_cross_track);
    std::printf("  max_heading_dev     = %.3f deg\n", s.max_heading_dev);
  }
}

void print_trim(const alloc::TrimPoint& trim) {
  std::printf("phase    = %s\n", alloc::phase_name(trim.phase));
  std::printf("airspeed = %s m/s\n", sim::format_double(trim.airspeed).c_str());
  std::printf("pitch    = %.4f deg\n", trim.state.pitch() * 180.0 / M_PI);
  std::printf("residual = %s\n", sim::format_double(trim.residual).c_str());
  const auto& names = actuator_names();
  for (int i = 0; i < kNumActuators; ++i) {
    std::printf("%-9s = %s\n", names[i].c_str(), sim::format_double(trim.u0[i]).c_str());
  }
}

int cmd_run(const std::string& file, const std::string& out_dir, long long seed,
            const std::string& format, bool quiet, bool strict) {
  sim::FullConfig cfg = sim::load_config_file(file);
  if (seed >= 0) cfg.scenario.seed = static_cast<std::uint64_t>(seed);
  std::filesystem::create_directories(out_dir);

  const sim::SimRunResult result =
      sim::run_scenario(cfg.scenario, cfg.vehicle, cfg.geometry, cfg.bounds, cfg.allocator,
                        cfg.controller, cfg.sim);

  const std::filesystem::path out(out_dir);
  const std::string trace_path = (out / (cfg.scenario.name + ".csv")).string();
  sim::write_trace_csv(trace_path, result.trace);
  const std::string summary_path =
      (out / (cfg.scenario.name + "_summary" + (format == "kv" ? ".kv" : ".csv"))).string();
  if (format == "kv") {
    sim::write_summary_kv(summary_path, {result.summary});
  } else {
    sim::write_summary_csv(summary_path, {result.summary});
  }
  if (!quiet) {
    print_summary(result.summary);
    std::printf("trace   -> %s\n", trace_path.c_str());
    std::printf("summary -> %s\n", summary_path.c_str());
  }
  return strict && result.summary.crash ? kExitCrash : kExitOk;
}

int cmd_suite(const std::string& out_dir, bool quiet, bool strict) {
  const std::vector<sim::SuiteRun> runs = sim::run_suite(out_dir, quiet);
  if (!quiet) std::printf("wrote %zu runs -> %s\n", runs.size(), out_dir.c_str());
  if (!strict) return kExitOk;
  for (const sim::SuiteRun& r : runs) {
    if (r.result.summary.crash) return kExitCrash;
  }
  return kExitOk;
}

int cmd_wrench(const std::string& file, const std::string& out_dir, long long seed,
               int samples, bool quiet) {
  const sim::FullConfig cfg = sim::load_config_file(file);
  const std::vector<alloc::FailureInfo> failures = pinned_failures(cfg.scenario);
  const std::uint64_t rng_seed =
      seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.scenario.seed;
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);

  wrench_space::SamplingConfig sc;
  sc.params = cfg.vehicle;
  sc.geometry = cfg.geometry;
  sc.bounds = cfg.bounds;
  sc.cruise_airspeed = cfg.scenario.setpoint.cruise_airspeed;

  sc.configuration = wrench_space::Configuration::kMultirotor;
  const auto mc_cloud = wrench_space::sample_wrench_set(sc, failures, samples, rng_seed);
  const std::string mc_path = (out / "wrench_multirotor.csv").string();
  wrench_space::export_wrench_cloud(mc_path, mc_cloud);

  sc.configuration = wrench_space::Configuration::kFixedWing;
  const auto fw_cloud = wrench_space::sample_wrench_set(sc, failures, samples, rng_seed);
  const std::string fw_path = (out / "wrench_fixedwing.csv").string();
  wrench_space::export_wrench_cloud(fw_path, fw_cloud);

  sc.configuration = wrench_space::Configuration::kMultirotor;
  const auto hover_fixed = wrench_space::static_hover_check(sc, failures, false);
  const auto hover_tilt = wrench_space::static_hover_check(sc, failures, true);
  const auto cruise = wrench_space::cruise_check(sc, failures, sc.cruise_airspeed);

  const std::string report_path = (out / "wrench_report.kv").string();
  {
    std::FILE* rep = std::fopen(report_path.c_str(), "w");
    if (!rep) throw std::runtime_error("cannot write '" + report_path + "'");
    std::fprintf(rep, "samples = %d\nseed = %llu\nfailures = %zu\n", samples,
                 static_cast<unsigned long long>(rng_seed), failures.size());
    std::fprintf(rep, "hover_fixed_tilt_feasible = %d\n", hover_fixed.feasible ? 1 : 0);
    std::fprintf(rep, "hover_fixed_tilt_thrust_margin = %s\n",
                 sim::format_double(hover_fixed.thrust_margin).c_str());
    std::fprintf(rep, "hover_free_tilt_feasible = %d\n", hover_tilt.feasible ? 1 : 0);
    std::fprintf(rep, "hover_free_tilt_thrust_margin = %s\n",
                 sim::format_double(hover_tilt.thrust_margin).c_str());
    std::fprintf(rep, "cruise_feasible = %d\n", cruise.feasible ? 1 : 0);
    std::fprintf(rep, "cruise_airspeed = %s\n", sim::format_double(sc.cruise_airspeed).c_str());
    std::fclose(rep);
  }
  if (!quiet) {
    std::printf("hover (tilts up):   %s  margin %.2f N\n",
                hover_fixed.feasible ? "feasible" : "infeasible", hover_fixed.thrust_margin);
    std::printf("hover (tilts free): %s  margin %.2f N\n",
                hover_tilt.feasible ? "feasible" : "infeasible", hover_tilt.thrust_margin);
    std::printf("cruise at %.1f m/s: %s\n", sc.cruise_airspeed,
                cruise.feasible ? "feasible" : "infeasible");
    std::printf("clouds  -> %s, %s\n", mc_path.c_str(), fw_path.c_str());
    std::printf("report  -> %s\n", report_path.c_str());
  }
  return kExitOk;
}

int cmd_trim(const std::string& phase, const std::string& config_file) {
  sim::FullConfig cfg =
      config_file.empty() ? sim::default_config() : sim::load_config_file(config_file);
  const std::vector<alloc::FailureInfo> failures = pinned_failures(cfg.scenario);
  alloc::TrimPoint trim;
  if (phase == "hover") {
    trim = failures.empty()
               ? alloc::find_hover_trim(cfg.vehicle, cfg.geometry, cfg.bounds)
               : alloc::find_hover_trim(cfg.vehicle, cfg.geometry, cfg.bounds, failures);
  } else if (phase == "cruise") {
    trim = alloc::find_cruise_trim(cfg.vehicle, cfg.geometry, cfg.bounds,
                                   cfg.scenario.setpoint.cruise_airspeed, failures);
  } else {
    std::fprintf(stderr, "unknown phase '%s' (hover, cruise)\n", phase.c_str());
    return kExitConfig;
  }
  print_trim(trim);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control-allocation toolkit and desk simulator for a tiltrotor VTOL UAV"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  long long seed = -1;
  std::string format = "csv";
  bool quiet = false;
  bool strict = false;

  std::string run_file;
  CLI::App* run = app.add_subcommand("run", "Run one scenario from a config file");
  run->add_option("scenario-file", run_file, "scenario config file")->required();
  run->add_option("--out", out_dir, "output directory (default $TILTALLOC_OUT or .)");
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--format", format, "summary format")
      ->check(CLI::IsMember({"csv", "kv"}));
  run->add_flag("--quiet", quiet, "suppress progress output");
  run->add_flag("--strict", strict, "exit 1 if the run ends crash-flagged");

  CLI::App* suite = app.add_subcommand(
      "suite", "Run the five shipped failure cases, informed and uninformed");
  suite->add_option("--out", out_dir, "output directory (default $TILTALLOC_OUT or .)");
  suite->add_flag("--quiet", quiet, "suppress progress output");
  suite->add_flag("--strict", strict,
                  "exit 1 if any run crashes (the uninformed cases are expected to)");

  std::string wrench_file;
  int samples = 4096;
  CLI::App* wrench = app.add_subcommand(
      "wrench", "Sample the attainable wrench set and run feasibility checks");
  wrench->add_option("config-file", wrench_file, "vehicle config file")->required();
  wrench->add_option("--out", out_dir, "output directory (default $TILTALLOC_OUT or .)");
  wrench->add_option("--seed", seed, "sampling seed (default: scenario seed)");
  wrench->add_option("--samples", samples, "points per cloud")->check(CLI::PositiveNumber);
  wrench->add_flag("--quiet", quiet, "suppress progress output");

  std::string trim_phase;
  std::string trim_config;
  CLI::App* trim = app.add_subcommand("trim", "Print the trim point for a phase");
  trim->add_option("phase", trim_phase, "hover or cruise")->required();
  trim->add_option("config-file", trim_config, "optional vehicle config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_file, out_dir, seed, format, quiet, strict);
    if (*suite) return cmd_suite(out_dir, quiet, strict);
    if (*wrench) return cmd_wrench(wrench_file, out_dir, seed, samples, quiet);
    if (*trim) return cmd_trim(trim_phase, trim_config);
  } catch (const sim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const alloc::TrimNotFound& e) {
    std::fprintf(stderr, "no trim found: %s (best residual %g)\n", e.what(), e.best_residual);
    return kExitCrash;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
