#include "tiltalloc/trace.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tiltalloc::sim {

namespace {

constexpr int kTraceCols = 57;

const std::array<std::string, kTraceCols>& trace_columns() {
  static const std::array<std::string, kTraceCols> cols = [] {
    std::array<std::string, kTraceCols> c;
    int k = 0;
    for (const char* n : {"t", "px", "py", "pz", "vx", "vy", "vz", "qw", "qx", "qy", "qz",
                          "wx", "wy", "wz", "Va", "alpha", "beta", "phase"}) {
      c[k++] = n;
    }
    for (int i = 0; i < kNumActuators; ++i) c[k++] = "u_cmd_" + std::to_string(i);
    for (int i = 0; i < kNumActuators; ++i) c[k++] = "u_eff_" + std::to_string(i);
    for (int i = 0; i < 6; ++i) c[k++] = "Wd_" + std::to_string(i);
    for (int i = 0; i < 6; ++i) c[k++] = "Wa_" + std::to_string(i);
    for (const char* n : {"J", "residual", "saturated"}) c[k++] = n;
    return c;
  }();
  return cols;
}

std::array<double, kTraceCols> flatten(const TraceRecord& r) {
  std::array<double, kTraceCols> v{};
  int k = 0;
  v[k++] = r.t;
  for (int i = 0; i < 3; ++i) v[k++] = r.body.position[i];
  for (int i = 0; i < 3; ++i) v[k++] = r.body.velocity[i];
  v[k++] = r.body.attitude.w();
  v[k++] = r.body.attitude.x();
  v[k++] = r.body.attitude.y();
  v[k++] = r.body.attitude.z();
  for (int i = 0; i < 3; ++i) v[k++] = r.body.angular_rate[i];
  v[k++] = r.aero.airspeed;
  v[k++] = r.aero.alpha;
  v[k++] = r.aero.beta;
  v[k++] = static_cast<double>(r.phase);
  for (int i = 0; i < kNumActuators; ++i) v[k++] = r.u_cmd[i];
  for (int i = 0; i < kNumActuators; ++i) v[k++] = r.u_eff[i];
  for (int i = 0; i < 6; ++i) v[k++] = r.w_desired[i];
  for (int i = 0; i < 6; ++i) v[k++] = r.w_achieved[i];
  v[k++] = r.objective;
  v[k++] = r.residual;
  v[k++] = static_cast<double>(r.saturated);
  return v;
}

TraceRecord unflatten(const std::array<double, kTraceCols>& v) {
  TraceRecord r;
  int k = 0;
  r.t = v[k++];
  for (int i = 0; i < 3; ++i) r.body.position[i] = v[k++];
  for (int i = 0; i < 3; ++i) r.body.velocity[i] = v[k++];
  const double qw = v[k++], qx = v[k++], qy = v[k++], qz = v[k++];
  r.body.attitude = Eigen::Quaterniond(qw, qx, qy, qz);
  for (int i = 0; i < 3; ++i) r.body.angular_rate[i] = v[k++];
  r.aero.airspeed = v[k++];
  r.aero.alpha = v[k++];
  r.aero.beta = v[k++];
  r.aero.dynamic_pressure = 0.0;  // not a trace column
  r.phase = static_cast<FlightPhase>(static_cast<int>(v[k++]));
  for (int i = 0; i < kNumActuators; ++i) r.u_cmd[i] = v[k++];
  for (int i = 0; i < kNumActuators; ++i) r.u_eff[i] = v[k++];
  for (int i = 0; i < 6; ++i) r.w_desired[i] = v[k++];
  for (int i = 0; i < 6; ++i) r.w_achieved[i] = v[k++];
  r.objective = v[k++];
  r.residual = v[k++];
  r.saturated = static_cast<int>(v[k++]);
  return r;
}

double parse_field(const std::string& tok, const std::string& path, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

std::string header_line() {
  std::string h;
  for (int i = 0; i < kTraceCols; ++i) {
    if (i) h += ',';
    h += trace_columns()[i];
  }
  return h;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  // Shortest %.{n}g form that parses back to the identical bit pattern.
  // Higher precision can yield a *shorter* string when %g switches from
  // scientific to fixed notation (1200 needs 4 digits but beats 1.2e+03),
  // so scan all precisions and keep the shortest round-tripping one.
  char buf[40];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, value);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
    (void)ptr;
    if (ec == std::errc() && std::memcmp(&back, &value, sizeof back) == 0) {
      if (best.empty() || std::strlen(buf) < best.size()) best = buf;
      if (best.size() <= static_cast<size_t>(prec)) break;  // can't get shorter
    }
  }
  return best.empty() ? buf : best;
}

std::string format_sig9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << header_line() << '\n';
  for (const TraceRecord& r : trace) {
    const auto v = flatten(r);
    for (int i = 0; i < kTraceCols; ++i) {
      if (i) out << ',';
      out << format_double(v[i]);
    }
    out << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != header_line()) {
    throw std::runtime_error(path + ": not a trace CSV (bad header)");
  }
  std::vector<TraceRecord> trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, kTraceCols> v{};
    size_t pos = 0;
    for (int i = 0; i < kTraceCols; ++i) {
      const size_t comma = line.find(',', pos);
      const bool last = i == kTraceCols - 1;
      if (last != (comma == std::string::npos)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(kTraceCols) + " columns");
      }
      const std::string tok = line.substr(pos, last ? std::string::npos : comma - pos);
      v[i] = parse_field(tok, path, line_no);
      pos = comma + 1;
    }
    trace.push_back(unflatten(v));
  }
  return trace;
}

std::vector<std::string> emit_plotdata(const std::string& out_dir,
                                       const std::string& scenario_name,
                                       const std::vector<TraceRecord>& trace,
                                       const std::vector<std::string>& channels) {
  const auto& cols = trace_columns();
  std::vector<std::string> paths;
  for (const std::string& channel : channels) {
    int col = -1;
    for (int i = 0; i < kTraceCols; ++i) {
      if (cols[i] == channel) {
        col = i;
        break;
      }
    }
    if (col < 0) {
      std::string msg = "unknown channel '" + channel + "'; valid channels:";
      for (const std::string& c : cols) msg += ' ' + c;
      throw std::invalid_argument(msg);
    }
    const std::filesystem::path file =
        std::filesystem::path(out_dir) / (scenario_name + "_" + channel + ".dat");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write '" + file.string() + "'");
    for (const TraceRecord& r : trace) {
      const auto v = flatten(r);
      out << format_double(v[0]) << ' ' << format_double(v[col]) << '\n';
    }
    paths.push_back(file.string());
  }
  return paths;
}

namespace {

struct SummaryField {
  const char* key;
  std::string (*get)(const RunSummary&);
};

std::string fmt_int(long long v) { return std::to_string(v); }

const std::array<SummaryField, 11>& summary_fields() {
  static const std::array<SummaryField, 11> fields = {{
      {"name", [](const RunSummary& s) { return s.name; }},
      {"crash", [](const RunSummary& s) { return fmt_int(s.crash ? 1 : 0); }},
      {"crash_time", [](const RunSummary& s) { return format_double(s.crash_time); }},
      {"time_to_converge", [](const RunSummary& s) { return format_double(s.time_to_converge); }},
      {"max_attitude_dev", [](const RunSummary& s) { return format_double(s.max_attitude_dev); }},
      {"altitude_variation",
       [](const RunSummary& s) { return format_double(s.altitude_variation); }},
      {"saturation_count", [](const RunSummary& s) { return fmt_int(s.saturation_count); }},
      {"max_cross_track", [](const RunSummary& s) { return format_double(s.max_cross_track); }},
      {"max_heading_dev", [](const RunSummary& s) { return format_double(s.max_heading_dev); }},
      {"mean_front_tilt", [](const RunSummary& s) { return format_double(s.mean_front_tilt); }},
      {"mean_rear_tilt", [](const RunSummary& s) { return format_double(s.mean_rear_tilt); }},
  }};
  return fields;
}

}  // namespace

void write_summary_kv(const std::string& path, const std::vector<RunSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  bool first = true;
  for (const RunSummary& row : rows) {
    if (!first) out << '\n';
    first = false;
    for (const SummaryField& f : summary_fields()) {
      out << f.key << " = " << f.get(row) << '\n';
    }
  }
}

void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const auto& fields = summary_fields();
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i].key;
  }
  out << '\n';
  for (const RunSummary& row : rows) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i].get(row);
    }
    out << '\n';
  }
}

}  // namespace tiltalloc::sim
