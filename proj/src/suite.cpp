#include "tiltalloc/suite.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "tiltalloc/trace.hpp"

namespace tiltalloc::sim {

namespace {

constexpr double kInjectTime = 2.0;  // s, all shipped cases fail early in the hold

struct CaseDef {
  const char* name;
  MissionKind mission;
  double duration;  // s
  int actuator;
  double lock_value;  // u units
};

const CaseDef kCases[] = {
    {"tilt_lock_hover", MissionKind::kHoverHold, 25.0, kTilt1, 60.0 * M_PI / 180.0},
    {"motor_fail_hover", MissionKind::kHoverHold, 25.0, kRotor1, 0.0},
    {"motor_fail_cruise", MissionKind::kCruiseHold, 30.0, kRotor1, 0.0},
    {"elevator_lock_cruise", MissionKind::kCruiseHold, 30.0, kElevator, 6.0 * M_PI / 180.0},
    {"aileron_lock_cruise", MissionKind::kCruiseHold, 30.0, kAileron1, 15.0 * M_PI / 180.0},
};

}  // namespace

std::vector<std::string> suite_case_names() {
  std::vector<std::string> names;
  for (const CaseDef& c : kCases) names.emplace_back(c.name);
  return names;
}

FullConfig suite_case(const std::string& name, bool informed) {
  for (const CaseDef& c : kCases) {
    if (name != c.name) continue;
    FullConfig cfg = default_config();
    cfg.scenario.name = name + std::string(informed ? "_informed" : "_uninformed");
    cfg.scenario.mission = c.mission;
    cfg.scenario.duration = c.duration;
    cfg.scenario.failures.push_back({c.actuator, c.lock_value, kInjectTime, informed});
    return cfg;
  }
  std::string msg = "unknown suite case '" + name + "'; valid cases:";
  for (const CaseDef& c : kCases) msg += std::string(" ") + c.name;
  throw std::invalid_argument(msg);
}

std::vector<SuiteRun> run_suite(const std::string& out_dir, bool quiet) {
  std::filesystem::create_directories(out_dir);
  std::vector<SuiteRun> runs;
  std::vector<RunSummary> summaries;
  for (const CaseDef& c : kCases) {
    for (const bool informed : {true, false}) {
      const FullConfig cfg = suite_case(c.name, informed);
      SuiteRun run;
      run.case_name = c.name;
      run.informed = informed;
      run.result = run_scenario(cfg.scenario, cfg.vehicle, cfg.geometry, cfg.bounds,
                                cfg.allocator, cfg.controller, cfg.sim);
      const RunSummary& s = run.result.summary;
      if (!quiet) {
        if (s.crash) {
          std::printf("%-34s crashed at %.2f s\n", s.name.c_str(), s.crash_time);
        } else if (s.time_to_converge >= 0.0) {
          std::printf("%-34s ok, converged %.2f s after failure\n", s.name.c_str(),
                      s.time_to_converge);
        } else {
          std::printf("%-34s ok\n", s.name.c_str());
        }
        std::fflush(stdout);
      }
      write_trace_csv((std::filesystem::path(out_dir) / (s.name + ".csv")).string(),
                      run.result.trace);
      summaries.push_back(s);
      runs.push_back(std::move(run));
    }
  }
  write_summary_csv((std::filesystem::path(out_dir) / "summary.csv").string(), summaries);
  write_summary_kv((std::filesystem::path(out_dir) / "summary.kv").string(), summaries);
  return runs;
}

}  // namespace tiltalloc::sim
