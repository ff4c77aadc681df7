#pragma once

#include <string>
#include <vector>

#include "tiltalloc/sim.hpp"

namespace tiltalloc::sim {

/// Number formatting used by every data file: shortest representation
/// that parses back to the same double.
std::string format_double(double value);

/// Fixed nine-significant-digit formatting for wrench clouds.
std::string format_sig9(double value);

/// Trace CSV. Column layout (one row per control step):
/// t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,Va,alpha,beta,phase,
/// u_cmd_0..11,u_eff_0..11,Wd_0..5,Wa_0..5,J,residual,saturated
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// Reads back a trace CSV written by write_trace_csv.
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// Two-column (t value) plot files, one per channel, named
/// <scenario>_<channel>.dat inside out_dir. Channel names are the trace
/// header names. Returns the paths written. Unknown channels throw.
std::vector<std::string> emit_plotdata(const std::string& out_dir,
                                       const std::string& scenario_name,
                                       const std::vector<TraceRecord>& trace,
                                       const std::vector<std::string>& channels);

/// Summary writers: "key = value" text or a one-row-per-run CSV.
void write_summary_kv(const std::string& path, const std::vector<RunSummary>& rows);
void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows);

}  // namespace tiltalloc::sim
