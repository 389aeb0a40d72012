#pragma once

#include "gtsim/harness.hpp"

#include <string>
#include <vector>

namespace gtsim {

/// Column order of the trace CSV.
inline constexpr const char* kTraceHeader =
    "t,eta,zeta,consensus_x,consensus_s,snap_grad_dist,psi,mean_dist,subopt";

/// One CSV line (no newline) with 17 significant digits per float.
std::string format_record(const IterRecord& rec);
IterRecord parse_record(const std::string& line);

std::string trace_to_csv(const Trace& trace);
std::vector<IterRecord> csv_to_records(const std::string& text);

/// Throws std::runtime_error when the path cannot be written or read.
void write_trace(const Trace& trace, const std::string& path);
std::vector<IterRecord> read_trace(const std::string& path);

/// Config echo plus summary as JSON.
std::string summary_json(const Trace& trace);
void write_summary(const Trace& trace, const std::string& path);

std::string sweep_to_csv(const SweepResult& sweep);

/// Writes text to a file in binary mode (LF line endings preserved).
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace gtsim
