#pragma once

#include "tiltalloc/config.hpp"

namespace tiltalloc::sim {

/**
 * The five shipped failure cases:
 *   tilt_lock_hover      tilt 1 jammed at 60 deg while hovering
 *   motor_fail_hover     rotor 1 dead while hovering
 *   motor_fail_cruise    rotor 1 dead in cruise
 *   elevator_lock_cruise elevator jammed at 6 deg in cruise
 *   aileron_lock_cruise  aileron 1 jammed at 15 deg in cruise
 * Each in an informed and an uninformed variant.
 */
std::vector<std::string> suite_case_names();

/// Full run configuration for one named case. `informed` selects whether
/// the allocator is told about the failure. Throws std::invalid_argument
/// for unknown names.
FullConfig suite_case(const std::string& name, bool informed);

struct SuiteRun {
  std::string case_name;
  bool informed = false;
  SimRunResult result;
};

/// Runs all ten variants sequentially (deterministic order), writes one
/// trace CSV per run plus summary.csv / summary.kv into out_dir.
std::vector<SuiteRun> run_suite(const std::string& out_dir, bool quiet);

}  // namespace tiltalloc::sim
