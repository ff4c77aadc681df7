#include "tiltalloc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "tiltalloc/trace.hpp"

namespace tiltalloc::sim {

namespace {

std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) parts.push_back(tok);
  return parts;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(line, "expected a number, got '" + tok + "'");
  }
  return v;
}

long long parse_int(const std::string& tok, int line) {
  long long v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(line, "expected an integer, got '" + tok + "'");
  }
  return v;
}

std::vector<double> parse_doubles(const std::string& value, size_t count, int line) {
  const std::vector<std::string> toks = split_ws(value);
  if (toks.size() != count) {
    throw ConfigError(line, "expected " + std::to_string(count) + " numbers, got " +
                                std::to_string(toks.size()));
  }
  std::vector<double> out;
  out.reserve(count);
  for (const std::string& t : toks) out.push_back(parse_double(t, line));
  return out;
}

int actuator_index(const std::string& tok, int line) {
  const auto& names = actuator_names();
  for (int i = 0; i < kNumActuators; ++i) {
    if (names[i] == tok) return i;
  }
  // Accept the flat index as well; names are what serialize emits.
  const long long idx = parse_int(tok, line);
  if (idx < 0 || idx >= kNumActuators) {
    throw ConfigError(line, "actuator index out of range: '" + tok + "'");
  }
  return static_cast<int>(idx);
}

MissionKind parse_mission(const std::string& tok, int line) {
  if (tok == "hover_hold") return MissionKind::kHoverHold;
  if (tok == "cruise_hold") return MissionKind::kCruiseHold;
  if (tok == "full_mission") return MissionKind::kFullMission;
  throw ConfigError(line, "unknown mission '" + tok +
                              "' (hover_hold, cruise_hold, full_mission)");
}

std::string join(const double* v, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::string join3(const Vec3& v) { return join(v.data(), 3); }

// One scalar-keyed entry: how to read it from a config and how to write
// it back. The same table drives both directions so they cannot drift.
struct KeyIo {
  std::string key;
  std::function<void(FullConfig&, const std::string&, int)> set;
  std::function<std::string(const FullConfig&)> get;
};

KeyIo num_key(std::string key, std::function<double&(FullConfig&)> ref) {
  KeyIo io;
  io.key = std::move(key);
  io.set = [ref](FullConfig& c, const std::string& v, int line) {
    ref(c) = parse_double(v, line);
  };
  io.get = [ref](const FullConfig& c) { return format_double(ref(const_cast<FullConfig&>(c))); };
  return io;
}

KeyIo vec3_key(std::string key, std::function<Vec3&(FullConfig&)> ref) {
  KeyIo io;
  io.key = std::move(key);
  io.set = [ref](FullConfig& c, const std::string& v, int line) {
    const std::vector<double> xs = parse_doubles(v, 3, line);
    ref(c) = Vec3(xs[0], xs[1], xs[2]);
  };
  io.get = [ref](const FullConfig& c) { return join3(ref(const_cast<FullConfig&>(c))); };
  return io;
}

KeyIo vec12_key(std::string key, std::function<ActuatorVector&(FullConfig&)> ref) {
  KeyIo io;
  io.key = std::move(key);
  io.set = [ref](FullConfig& c, const std::string& v, int line) {
    const std::vector<double> xs = parse_doubles(v, kNumActuators, line);
    for (int i = 0; i < kNumActuators; ++i) ref(c)[i] = xs[i];
  };
  io.get = [ref](const FullConfig& c) {
    return join(ref(const_cast<FullConfig&>(c)).data(), kNumActuators);
  };
  return io;
}

KeyIo int_key(std::string key, std::function<void(FullConfig&, long long)> set,
              std::function<long long(const FullConfig&)> get) {
  KeyIo io;
  io.key = std::move(key);
  io.set = [set](FullConfig& c, const std::string& v, int line) { set(c, parse_int(v, line)); };
  io.get = [get](const FullConfig& c) { return std::to_string(get(c)); };
  return io;
}

// Section tables in canonical order. Every key both parses and prints.
using Section = std::vector<KeyIo>;

const std::map<std::string, Section, std::less<>>& sections();

Section make_vehicle() {
  Section s;
  auto f = [](double VehicleParams::*m) {
    return [m](FullConfig& c) -> double& { return c.vehicle.*m; };
  };
  s.push_back(num_key("mass", f(&VehicleParams::mass)));
  s.push_back(num_key("wingspan", f(&VehicleParams::wingspan)));
  s.push_back(num_key("air_density", f(&VehicleParams::air_density)));
  s.push_back(num_key("mean_chord", f(&VehicleParams::mean_chord)));
  s.push_back(num_key("wing_area", f(&VehicleParams::wing_area)));
  s.push_back(num_key("thrust_coeff", f(&VehicleParams::thrust_coeff)));
  s.push_back(num_key("torque_coeff", f(&VehicleParams::torque_coeff)));
  s.push_back(num_key("aileron_eff", f(&VehicleParams::aileron_eff)));
  s.push_back(num_key("elevator_eff", f(&VehicleParams::elevator_eff)));
  s.push_back(num_key("rudder_eff", f(&VehicleParams::rudder_eff)));
  s.push_back(num_key("lift_coeff0", f(&VehicleParams::lift_coeff0)));
  s.push_back(num_key("lift_coeff_alpha", f(&VehicleParams::lift_coeff_alpha)));
  s.push_back(num_key("drag_coeff0", f(&VehicleParams::drag_coeff0)));
  s.push_back(num_key("drag_coeff_alpha", f(&VehicleParams::drag_coeff_alpha)));
  s.push_back(num_key("gravity", f(&VehicleParams::gravity)));
  return s;
}

Section make_geometry() {
  Section s;
  for (int r = 0; r < 4; ++r) {
    s.push_back(vec3_key("rotor" + std::to_string(r + 1) + "_position",
                         [r](FullConfig& c) -> Vec3& { return c.geometry.position[r]; }));
  }
  KeyIo spin;
  spin.key = "spin_dir";
  spin.set = [](FullConfig& c, const std::string& v, int line) {
    const std::vector<double> xs = parse_doubles(v, 4, line);
    for (int i = 0; i < 4; ++i) {
      if (xs[i] != 1.0 && xs[i] != -1.0) throw ConfigError(line, "spin_dir entries must be 1 or -1");
      c.geometry.spin_dir[i] = static_cast<int>(xs[i]);
    }
  };
  spin.get = [](const FullConfig& c) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
      if (i) out += ' ';
      out += std::to_string(c.geometry.spin_dir[i]);
    }
    return out;
  };
  s.push_back(spin);
  return s;
}

Section make_bounds() {
  Section s;
  s.push_back(vec12_key("lower", [](FullConfig& c) -> ActuatorVector& { return c.bounds.lower; }));
  s.push_back(vec12_key("upper", [](FullConfig& c) -> ActuatorVector& { return c.bounds.upper; }));
  return s;
}

Section make_allocator() {
  Section s;
  s.push_back(num_key("weight_rotor",
                      [](FullConfig& c) -> double& { return c.allocator.weights.rotor; }));
  s.push_back(num_key("weight_tilt",
                      [](FullConfig& c) -> double& { return c.allocator.weights.tilt; }));
  s.push_back(num_key("weight_surface",
                      [](FullConfig& c) -> double& { return c.allocator.weights.surface; }));
  s.push_back(num_key("fd_step_rotor",
                      [](FullConfig& c) -> double& { return c.allocator.fd_steps.rotor; }));
  s.push_back(num_key("fd_step_angle",
                      [](FullConfig& c) -> double& { return c.allocator.fd_steps.angle; }));
  s.push_back(int_key(
      "relinearize_steady",
      [](FullConfig& c, long long v) { c.allocator.relinearize_steady = static_cast<int>(v); },
      [](const FullConfig& c) { return c.allocator.relinearize_steady; }));
  s.push_back(int_key(
      "relinearize_transition",
      [](FullConfig& c, long long v) { c.allocator.relinearize_transition = static_cast<int>(v); },
      [](const FullConfig& c) { return c.allocator.relinearize_transition; }));
  return s;
}

Section make_controller() {
  Section s;
  auto f = [](double ControllerGains::*m) {
    return [m](FullConfig& c) -> double& { return c.controller.*m; };
  };
  auto v = [](Vec3 ControllerGains::*m) {
    return [m](FullConfig& c) -> Vec3& { return c.controller.*m; };
  };
  s.push_back(num_key("pos_p", f(&ControllerGains::pos_p)));
  s.push_back(num_key("vel_p", f(&ControllerGains::vel_p)));
  s.push_back(num_key("vel_p_z", f(&ControllerGains::vel_p_z)));
  s.push_back(num_key("vel_i", f(&ControllerGains::vel_i)));
  s.push_back(num_key("vel_limit", f(&ControllerGains::vel_limit)));
  s.push_back(num_key("acc_limit", f(&ControllerGains::acc_limit)));
  s.push_back(num_key("acc_limit_z", f(&ControllerGains::acc_limit_z)));
  s.push_back(num_key("att_p", f(&ControllerGains::att_p)));
  s.push_back(num_key("rate_limit", f(&ControllerGains::rate_limit)));
  s.push_back(vec3_key("rate_p", v(&ControllerGains::rate_p)));
  s.push_back(vec3_key("rate_d", v(&ControllerGains::rate_d)));
  s.push_back(num_key("speed_p", f(&ControllerGains::speed_p)));
  s.push_back(num_key("speed_i", f(&ControllerGains::speed_i)));
  s.push_back(num_key("alt_p", f(&ControllerGains::alt_p)));
  s.push_back(num_key("climb_limit", f(&ControllerGains::climb_limit)));
  s.push_back(num_key("climb_p", f(&ControllerGains::climb_p)));
  s.push_back(num_key("climb_i", f(&ControllerGains::climb_i)));
  s.push_back(num_key("pitch_from_climb", f(&ControllerGains::pitch_from_climb)));
  s.push_back(num_key("pitch_cmd_limit", f(&ControllerGains::pitch_cmd_limit)));
  s.push_back(num_key("heading_p", f(&ControllerGains::heading_p)));
  s.push_back(num_key("roll_cmd_limit", f(&ControllerGains::roll_cmd_limit)));
  s.push_back(num_key("xtrack_p", f(&ControllerGains::xtrack_p)));
  s.push_back(num_key("xtrack_limit", f(&ControllerGains::xtrack_limit)));
  s.push_back(vec3_key("moment_limit", v(&ControllerGains::moment_limit)));
  s.push_back(vec3_key("force_limit", v(&ControllerGains::force_limit)));
  return s;
}

Section make_sim() {
  Section s;
  auto f = [](double SimParams::*m) {
    return [m](FullConfig& c) -> double& { return c.sim.*m; };
  };
  s.push_back(vec3_key("inertia", [](FullConfig& c) -> Vec3& { return c.sim.inertia_diag; }));
  s.push_back(num_key("rotor_lag", f(&SimParams::rotor_lag)));
  s.push_back(num_key("tilt_lag", f(&SimParams::tilt_lag)));
  s.push_back(num_key("surface_lag", f(&SimParams::surface_lag)));
  s.push_back(num_key("v_transition", f(&SimParams::v_transition)));
  s.push_back(num_key("tilt_align_tol", f(&SimParams::tilt_align_tol)));
  s.push_back(num_key("crash_attitude", f(&SimParams::crash_attitude)));
  s.push_back(num_key("converge_rate_frac", f(&SimParams::converge_rate_frac)));
  s.push_back(num_key("converge_hold", f(&SimParams::converge_hold)));
  return s;
}

Section make_scenario() {
  Section s;
  KeyIo name;
  name.key = "name";
  name.set = [](FullConfig& c, const std::string& v, int) { c.scenario.name = v; };
  name.get = [](const FullConfig& c) { return c.scenario.name; };
  s.push_back(name);

  KeyIo mission;
  mission.key = "mission";
  mission.set = [](FullConfig& c, const std::string& v, int line) {
    c.scenario.mission = parse_mission(v, line);
  };
  mission.get = [](const FullConfig& c) { return std::string(mission_name(c.scenario.mission)); };
  s.push_back(mission);

  s.push_back(num_key("duration", [](FullConfig& c) -> double& { return c.scenario.duration; }));
  // Control/integration step: a scenario-level choice, applied to the
  // plant parameters for the run.
  s.push_back(num_key("dt", [](FullConfig& c) -> double& { return c.sim.dt; }));
  s.push_back(int_key(
      "seed", [](FullConfig& c, long long v) { c.scenario.seed = static_cast<std::uint64_t>(v); },
      [](const FullConfig& c) { return static_cast<long long>(c.scenario.seed); }));
  s.push_back(vec3_key("hover_position",
                       [](FullConfig& c) -> Vec3& { return c.scenario.setpoint.hover_position; }));
  auto f = [](double FlightSetpoint::*m) {
    return [m](FullConfig& c) -> double& { return c.scenario.setpoint.*m; };
  };
  s.push_back(num_key("yaw", f(&FlightSetpoint::yaw)));
  s.push_back(num_key("cruise_altitude", f(&FlightSetpoint::cruise_altitude)));
  s.push_back(num_key("cruise_airspeed", f(&FlightSetpoint::cruise_airspeed)));
  s.push_back(num_key("cruise_heading", f(&FlightSetpoint::cruise_heading)));
  s.push_back(num_key("track_offset_y", f(&FlightSetpoint::track_offset_y)));
  s.push_back(num_key("transition_fw_time",
                      [](FullConfig& c) -> double& { return c.scenario.transition_fw_time; }));
  s.push_back(num_key("transition_mc_time",
                      [](FullConfig& c) -> double& { return c.scenario.transition_mc_time; }));

  // Repeatable: one line per injected failure, "<actuator> <value> <time>
  // <informed 0|1>". Serialization emits them in storage order.
  KeyIo failure;
  failure.key = "failure";
  failure.set = [](FullConfig& c, const std::string& v, int line) {
    const std::vector<std::string> toks = split_ws(v);
    if (toks.size() != 4) {
      throw ConfigError(line, "failure takes: <actuator> <value> <time> <informed 0|1>");
    }
    FailureSpec fs;
    fs.index = actuator_index(toks[0], line);
    fs.value = parse_double(toks[1], line);
    fs.time = parse_double(toks[2], line);
    const long long informed = parse_int(toks[3], line);
    if (informed != 0 && informed != 1) {
      throw ConfigError(line, "informed flag must be 0 or 1");
    }
    fs.informed = informed == 1;
    c.scenario.failures.push_back(fs);
  };
  failure.get = [](const FullConfig&) { return std::string(); };  // handled by serializer
  s.push_back(failure);
  return s;
}

const std::map<std::string, Section, std::less<>>& sections() {
  static const std::map<std::string, Section, std::less<>> all = {
      {"vehicle", make_vehicle()},     {"geometry", make_geometry()},
      {"bounds", make_bounds()},       {"allocator", make_allocator()},
      {"controller", make_controller()}, {"sim", make_sim()},
      {"scenario", make_scenario()},
  };
  return all;
}

// Canonical section order for serialization (map order is alphabetical,
// which would scatter the file).
const char* const kSectionOrder[] = {"vehicle", "geometry",   "bounds", "allocator",
                                     "controller", "sim", "scenario"};

}  // namespace

FullConfig default_config() { return FullConfig{}; }

FullConfig parse_config(const std::string& text) {
  FullConfig cfg = default_config();
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim_ws(raw);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line_no, "expected 'section.key = value'");
    }
    const std::string key_full = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));
    const auto dot = key_full.find('.');
    if (dot == std::string::npos) {
      throw ConfigError(line_no, "key must be 'section.key', got '" + key_full + "'");
    }
    const std::string section = key_full.substr(0, dot);
    const std::string key = key_full.substr(dot + 1);

    const auto sit = sections().find(section);
    if (sit == sections().end()) {
      throw ConfigError(line_no, "unknown section '" + section + "'");
    }
    bool found = false;
    for (const KeyIo& io : sit->second) {
      if (io.key == key) {
        io.set(cfg, value, line_no);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError(line_no, "unknown key '" + key + "' in section '" + section + "'");
    }
  }
  return cfg;
}

std::string serialize_config(const FullConfig& config) {
  std::string out;
  for (const char* section : kSectionOrder) {
    const Section& keys = sections().at(section);
    for (const KeyIo& io : keys) {
      if (io.key == "failure") {
        const auto& names = actuator_names();
        for (const FailureSpec& f : config.scenario.failures) {
          out += "scenario.failure = " + names[f.index] + ' ' + format_double(f.value) + ' ' +
                 format_double(f.time) + ' ' + (f.informed ? "1" : "0") + '\n';
        }
        continue;
      }
      out += std::string(section) + '.' + io.key + " = " + io.get(config) + '\n';
    }
    out += '\n';
  }
  return out;
}

FullConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config_file(const std::string& path, const FullConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError(0, "cannot write '" + path + "'");
  out << serialize_config(config);
}

}  // namespace tiltalloc::sim
