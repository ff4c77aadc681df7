#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tiltalloc/effectiveness.hpp"
#include "tiltalloc/model.hpp"
#include "tiltalloc/trim.hpp"

namespace tiltalloc::wrench_space {

using alloc::FailureInfo;

/// Which operating regime the attainable-wrench questions are asked in.
enum class Configuration {
  kMultirotor,  // hover state: tilts up, surfaces centered, no airflow
  kFixedWing,   // cruise trim state at a given airspeed
};

struct SamplingConfig {
  VehicleParams params;
  RotorGeometry geometry;
  ActuatorBounds bounds;
  Configuration configuration = Configuration::kMultirotor;
  double cruise_airspeed = 20.0;  // used by kFixedWing only
};

/// Monte-Carlo image of the actuator box under the controlled wrench map
/// (gravity excluded; it is input-independent and only shifts the set).
struct WrenchSetSample {
  std::vector<Vec6> points;     // [Mx My Mz Fx Fy Fz]
  std::vector<Vec12> inputs;    // the u that generated each point
  Configuration configuration;
  std::vector<FailureInfo> failures;
  std::uint64_t seed = 0;
};

/// Multirotor config samples rotor speeds only (tilts pinned up,
/// surfaces centered); fixed-wing samples all twelve channels at the
/// cruise trim state. Failed channels sit at their lock values.
/// Deterministic: same seed, same cloud.
WrenchSetSample sample_wrench_set(const SamplingConfig& config,
                                  const std::vector<FailureInfo>& failures, int n_samples,
                                  std::uint64_t rng_seed);

/// CSV with header Mx,My,Mz,Fx,Fy,Fz, nine significant digits per value.
void export_wrench_cloud(const std::string& path, const WrenchSetSample& sample);

/// Result of a hover-capability query.
struct HoverFeasibility {
  bool feasible = false;
  int rank_force_map = 0;              // rank of the linear force map in t variables
  std::optional<ActuatorVector> witness;
  double thrust_margin = 0.0;          // max controlled-thrust magnitude minus weight, N
  double moment_residual = 0.0;        // |moment| at the witness
  std::string diagnostic;
};

/**
 * Can the vehicle hold a static hover? Requires an input strictly inside
 * the box (failed channels excepted) with zero body moment and controlled
 * thrust of at least the vehicle weight.
 *
 * allow_tilt = false pins the tilts straight up; the wrench map is then
 * linear in t = w^2 and the answer is exact. allow_tilt = true frees the
 * tilt angles and searches with a deterministic multi-start damped
 * least-squares scheme (16 starts).
 */
HoverFeasibility static_hover_check(const SamplingConfig& config,
                                    const std::vector<FailureInfo>& failures, bool allow_tilt);

struct CruiseFeasibility {
  bool feasible = false;
  std::optional<ActuatorVector> witness;
  double witness_alpha = 0.0;       // rad, incidence at the witness
  double forward_force = 0.0;       // N, inertial-x controlled force at the witness
  double upward_force = 0.0;        // N, inertial up controlled force at the witness
  double moment_residual = 0.0;     // |moment| at the witness
  std::string diagnostic;
};

/// Can the vehicle hold steady level cruise at this airspeed? Searches
/// for an interior trim (failed channels pinned); feasible means the full
/// wrench balance closes, i.e. upward controlled force equals the weight
/// and net forward force is zero with zero moment.
CruiseFeasibility cruise_check(const SamplingConfig& config,
                               const std::vector<FailureInfo>& failures, double airspeed);

/// Strict-interior margin witnesses must keep from the box faces,
/// as a fraction of each functioning actuator's range.
inline constexpr double kInteriorMargin = 0.01;

}  // namespace tiltalloc::wrench_space
