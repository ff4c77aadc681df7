#pragma once

#include <stdexcept>
#include <string>

#include "tiltalloc/sim.hpp"

namespace tiltalloc::sim {

/// Parse failure with the 1-based line it happened on.
struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
};

/// Complete run description: plant, geometry, actuator box, allocator
/// settings, controller gains, scenario. One file drives one run.
struct FullConfig {
  VehicleParams vehicle;
  RotorGeometry geometry;
  ActuatorBounds bounds = default_bounds();
  alloc::AllocatorSettings allocator;
  ControllerGains controller;
  SimParams sim;
  Scenario scenario;
};

FullConfig default_config();

/**
 * Line-oriented "section.key = value" format; '#' starts a comment line.
 * Sections: vehicle, geometry, bounds, allocator, controller, sim,
 * scenario. Unknown keys, malformed lines and bad values throw ConfigError
 * with the line number. Multi-number values are space-separated.
 */
FullConfig parse_config(const std::string& text);

/// Canonical form: fixed key order, shortest round-trip numbers.
/// serialize(parse(serialize(c))) == serialize(c) byte for byte.
std::string serialize_config(const FullConfig& config);

FullConfig load_config_file(const std::string& path);
void save_config_file(const std::string& path, const FullConfig& config);

}  // namespace tiltalloc::sim
