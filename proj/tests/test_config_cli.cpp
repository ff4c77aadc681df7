#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tiltalloc/config.hpp"
#include "tiltalloc/suite.hpp"
#include "tiltalloc/trace.hpp"

using namespace tiltalloc;
using namespace tiltalloc::sim;
using doctest::Approx;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "tiltalloc_cfg_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int parse_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line;
  }
  return -1;
}

std::vector<TraceRecord> synthetic_trace() {
  std::vector<TraceRecord> trace(3);
  for (int k = 0; k < 3; ++k) {
    TraceRecord& r = trace[k];
    r.t = 0.004 * k;
    r.body.position = Vec3(0.1 * k, -0.2, -20.0 + k);
    r.body.velocity = Vec3(1.0 / 3.0, 0.0, -0.125);
    r.body.attitude = Quat(std::cos(0.1 * k), 0.0, 0.0, std::sin(0.1 * k));
    r.body.angular_rate = Vec3(0.0, 1e-17, -3.5);
    r.aero.airspeed = 20.0 + k;
    r.aero.alpha = 0.03;
    r.aero.beta = -0.001;
    r.phase = alloc::FlightPhase::kFixedWing;
    for (int i = 0; i < kNumActuators; ++i) {
      r.u_cmd[i] = 700.0 + i + 0.1 * k;
      r.u_eff[i] = 699.0 + i;
    }
    r.w_desired << 0.1, -0.2, 0.3, 0.0, 0.0, -45.126;
    r.w_achieved = r.w_desired;
    r.objective = 1.25e-3;
    r.residual = 7.0e-10;
    r.saturated = k == 2 ? 1 : 0;
  }
  return trace;
}

int run_cli(const std::string& args) {
  const int status = std::system(("./tiltalloc " + args).c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

}  // namespace

TEST_CASE("serialize-parse-serialize is byte-identical") {
  FullConfig cfg = default_config();
  SUBCASE("defaults") {}
  SUBCASE("with failures and overrides") {
    cfg.vehicle.mass = 5.25;
    cfg.scenario.name = "motor_out_case";
    cfg.scenario.mission = MissionKind::kCruiseHold;
    cfg.scenario.duration = 17.5;
    cfg.scenario.failures.push_back({kRotor1, 0.0, 2.0, true});
    cfg.scenario.failures.push_back({kElevator, 6.0 * M_PI / 180.0, 3.0, false});
    cfg.controller.rate_d = Vec3(0.45, 0.45, 0.0);
    cfg.sim.dt = 0.002;
  }
  const std::string once = serialize_config(cfg);
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
}

TEST_CASE("parsed overrides land in the right fields") {
  const FullConfig cfg = parse_config(
      "# comment line\n"
      "\n"
      "vehicle.mass = 5.5\n"
      "geometry.rotor3_position = -0.3 0.45 0.01\n"
      "bounds.upper = 1000 1000 1000 1000 2 2 2 2 0.5 0.5 0.5 0.5\n"
      "allocator.weight_tilt = 25\n"
      "controller.vel_p = 2.25   # trailing comment\n"
      "sim.rotor_lag = 0.08\n"
      "scenario.name = demo\n"
      "scenario.mission = cruise_hold\n"
      "scenario.dt = 0.002\n"
      "scenario.failure = rotor2 0 1.5 0\n"
      "scenario.failure = 10 0.1 3 1\n");

  CHECK(cfg.vehicle.mass == 5.5);
  CHECK(cfg.geometry.position[2] == Vec3(-0.3, 0.45, 0.01));
  CHECK(cfg.bounds.upper[kRotor1] == 1000.0);
  CHECK(cfg.allocator.weights.tilt == 25.0);
  CHECK(cfg.controller.vel_p == 2.25);
  CHECK(cfg.sim.rotor_lag == 0.08);
  CHECK(cfg.sim.dt == 0.002);
  CHECK(cfg.scenario.name == "demo");
  CHECK(cfg.scenario.mission == MissionKind::kCruiseHold);
  REQUIRE(cfg.scenario.failures.size() == 2);
  CHECK(cfg.scenario.failures[0].index == kRotor2);
  CHECK(cfg.scenario.failures[0].informed == false);
  CHECK(cfg.scenario.failures[1].index == kElevator);
  CHECK(cfg.scenario.failures[1].value == 0.1);
  CHECK(cfg.scenario.failures[1].informed == true);

  // Untouched keys keep their defaults.
  CHECK(cfg.vehicle.thrust_coeff == default_config().vehicle.thrust_coeff);
}

TEST_CASE("malformed input reports the offending line") {
  CHECK(parse_error_line("vehicle.mass = 4.6\nnot a key value line\n") == 2);
  CHECK(parse_error_line("\n# c\nrocket.mass = 1\n") == 3);
  CHECK(parse_error_line("vehicle.unknown_key = 1\n") == 1);
  CHECK(parse_error_line("vehicle.mass = heavy\n") == 1);
  CHECK(parse_error_line("mass = 4.6\n") == 1);  // missing section
  CHECK(parse_error_line("bounds.lower = 1 2 3\n") == 1);
  CHECK(parse_error_line("geometry.spin_dir = 1 -1 -1 2\n") == 1);
  CHECK(parse_error_line("scenario.mission = ballistic\n") == 1);
  CHECK(parse_error_line("scenario.failure = rotor1 0 2\n") == 1);
  CHECK(parse_error_line("scenario.failure = rotor9 0 2 1\n") == 1);
  CHECK(parse_error_line("scenario.failure = rotor1 0 2 maybe\n") == 1);
  CHECK(parse_error_line("scenario.seed = 1.5\n") == 1);
}

TEST_CASE("shortest round-trip formatting survives reparsing") {
  const double values[] = {0.0,    -0.0,   1.0 / 3.0, 0.1,  1200.0, 10.0,
                           1e-20,  M_PI,   713.4431181510079, -45.126, 2.2164e-5,
                           1.0e17, 0.3876621816920931};
  for (const double v : values) {
    CAPTURE(v);
    const std::string s = format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(format_double(1200.0) == "1200");
  CHECK(format_double(10.0) == "10");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_sig9(M_PI) == "3.14159265");
  CHECK(format_sig9(45.126) == "45.126");
}

TEST_CASE("trace CSV round-trips every stored column bit for bit") {
  const fs::path path = temp_dir() / "trace_roundtrip.csv";
  const std::vector<TraceRecord> trace = synthetic_trace();
  write_trace_csv(path.string(), trace);
  const std::vector<TraceRecord> back = read_trace_csv(path.string());

  REQUIRE(back.size() == trace.size());
  for (size_t k = 0; k < trace.size(); ++k) {
    const TraceRecord& a = trace[k];
    const TraceRecord& b = back[k];
    CHECK(a.t == b.t);
    CHECK((a.body.position - b.body.position).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.body.velocity - b.body.velocity).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.body.attitude.coeffs() == b.body.attitude.coeffs());
    CHECK((a.body.angular_rate - b.body.angular_rate).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.aero.airspeed == b.aero.airspeed);
    CHECK(a.aero.alpha == b.aero.alpha);
    CHECK(a.aero.beta == b.aero.beta);
    CHECK(a.phase == b.phase);
    CHECK((a.u_cmd - b.u_cmd).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.u_eff - b.u_eff).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.w_desired - b.w_desired).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.w_achieved - b.w_achieved).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.objective == b.objective);
    CHECK(a.residual == b.residual);
    CHECK(a.saturated == b.saturated);
  }

  std::ofstream(path) << "t,notatrace\n1,2\n";
  CHECK_THROWS_AS(read_trace_csv(path.string()), std::runtime_error);
}

TEST_CASE("plot data extraction writes one t-value file per channel") {
  const fs::path dir = temp_dir() / "plotdata";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<TraceRecord> trace = synthetic_trace();

  const auto paths = emit_plotdata(dir.string(), "demo", trace, {"pz", "u_cmd_0", "Va"});
  REQUIRE(paths.size() == 3);
  CHECK(fs::path(paths[0]).filename() == "demo_pz.dat");
  CHECK(fs::path(paths[1]).filename() == "demo_u_cmd_0.dat");

  std::istringstream first_line(slurp(paths[0]));
  double t = -1.0, value = 0.0;
  first_line >> t >> value;
  CHECK(t == 0.0);
  CHECK(value == -20.0);
  for (const auto& p : paths) {
    std::istringstream all(slurp(p));
    int rows = 0;
    std::string line;
    while (std::getline(all, line)) rows += !line.empty();
    CHECK(rows == 3);
  }

  CHECK(emit_plotdata(dir.string(), "demo", trace, {}).empty());
  CHECK_THROWS_WITH_AS(emit_plotdata(dir.string(), "demo", trace, {"altitude"}),
                       doctest::Contains("valid channels"), std::invalid_argument);
}

TEST_CASE("summary writers emit one row per run") {
  RunSummary a;
  a.name = "first";
  a.crash = false;
  a.time_to_converge = 9.656;
  a.saturation_count = 192;
  RunSummary b;
  b.name = "second";
  b.crash = true;
  b.crash_time = 2.6;

  const fs::path dir = temp_dir();
  write_summary_csv((dir / "summary.csv").string(), {a, b});
  write_summary_kv((dir / "summary.kv").string(), {a, b});

  const std::string csv = slurp(dir / "summary.csv");
  CHECK(csv.find("name,crash,crash_time,time_to_converge") == 0);
  CHECK(csv.find("\nfirst,0,") != std::string::npos);
  CHECK(csv.find("\nsecond,1,2.6,") != std::string::npos);

  const std::string kv = slurp(dir / "summary.kv");
  CHECK(kv.find("name = first") != std::string::npos);
  CHECK(kv.find("time_to_converge = 9.656") != std::string::npos);
  CHECK(kv.find("name = second") != std::string::npos);
  CHECK(kv.find("crash = 1") != std::string::npos);
}

TEST_CASE("the shipped corpus covers the five failure cases") {
  const std::vector<std::string> names = suite_case_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "tilt_lock_hover");
  CHECK(names[1] == "motor_fail_hover");
  CHECK(names[2] == "motor_fail_cruise");
  CHECK(names[3] == "elevator_lock_cruise");
  CHECK(names[4] == "aileron_lock_cruise");

  const FullConfig motor = suite_case("motor_fail_hover", true);
  CHECK(motor.scenario.name == "motor_fail_hover_informed");
  CHECK(motor.scenario.mission == MissionKind::kHoverHold);
  REQUIRE(motor.scenario.failures.size() == 1);
  CHECK(motor.scenario.failures[0].index == kRotor1);
  CHECK(motor.scenario.failures[0].value == 0.0);
  CHECK(motor.scenario.failures[0].informed);

  const FullConfig tilt = suite_case("tilt_lock_hover", false);
  CHECK_FALSE(tilt.scenario.failures[0].informed);
  CHECK(tilt.scenario.failures[0].value == Approx(M_PI / 3.0));
  // Lock values must sit inside the shipped actuator box.
  CHECK(tilt.bounds.contains(
      [&] {
        ActuatorVector u = ActuatorVector::Zero();
        u[tilt.scenario.failures[0].index] = tilt.scenario.failures[0].value;
        for (int i = kRotor1; i <= kRotor4; ++i) u[i] = 1.0;
        return u;
      }(),
      0.0));

  CHECK_THROWS_AS(suite_case("wing_fell_off", true), std::invalid_argument);
}

TEST_CASE("command line front end round trip") {
  REQUIRE(fs::exists("./tiltalloc"));  // built by the same cmake project
  const fs::path dir = temp_dir() / "cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  CHECK(run_cli("trim hover > " + (dir / "trim.txt").string()) == 0);
  const std::string trim = slurp(dir / "trim.txt");
  CHECK(trim.find("rotor1") != std::string::npos);
  CHECK(trim.find("713.44") != std::string::npos);

  CHECK(run_cli("run " + (dir / "missing.cfg").string() + " 2>/dev/null") == 2);

  std::ofstream(dir / "bad.cfg") << "vehicle.mass = heavy\n";
  CHECK(run_cli("run " + (dir / "bad.cfg").string() + " 2>/dev/null") == 2);

  std::ofstream(dir / "short.cfg") << "scenario.name = cli_smoke\n"
                                      "scenario.mission = hover_hold\n"
                                      "scenario.duration = 2\n";
  CHECK(run_cli("run " + (dir / "short.cfg").string() + " --quiet --strict --out " +
                dir.string()) == 0);
  CHECK(fs::exists(dir / "cli_smoke.csv"));
  CHECK(fs::exists(dir / "cli_smoke_summary.csv"));
  const auto trace = read_trace_csv((dir / "cli_smoke.csv").string());
  CHECK(trace.size() == 500);  // 2 s at the default 250 Hz
}
