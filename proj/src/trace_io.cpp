#include "gtsim/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gtsim {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

double parse_double(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') throw std::runtime_error("bad number '" + field + "' in trace");
  return v;
}

long parse_long(const std::string& field) {
  char* end = nullptr;
  const long v = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0') throw std::runtime_error("bad integer '" + field + "' in trace");
  return v;
}

nlohmann::ordered_json optional_number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string format_record(const IterRecord& r) {
  std::string out = std::to_string(r.t);
  out += ',';
  append_double(out, r.eta);
  out += ',';
  out += std::to_string(r.zeta);
  for (double v : {r.consensus_x, r.consensus_s, r.snap_grad_dist, r.psi, r.mean_dist, r.subopt}) {
    out += ',';
    append_double(out, v);
  }
  return out;
}

IterRecord parse_record(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 9) throw std::runtime_error("trace row has " + std::to_string(f.size()) + " fields, expected 9");
  IterRecord r;
  r.t = parse_long(f[0]);
  r.eta = parse_double(f[1]);
  r.zeta = static_cast<int>(parse_long(f[2]));
  r.consensus_x = parse_double(f[3]);
  r.consensus_s = parse_double(f[4]);
  r.snap_grad_dist = parse_double(f[5]);
  r.psi = parse_double(f[6]);
  r.mean_dist = parse_double(f[7]);
  r.subopt = parse_double(f[8]);
  return r;
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace.records) {
    out += format_record(r);
    out += '\n';
  }
  return out;
}

std::vector<IterRecord> csv_to_records(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw std::runtime_error("trace header mismatch");
  std::vector<IterRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_record(line));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_trace(const Trace& trace, const std::string& path) { write_text(path, trace_to_csv(trace)); }

std::vector<IterRecord> read_trace(const std::string& path) { return csv_to_records(read_text(path)); }

std::string summary_json(const Trace& trace) {
  const TraceSummary& s = trace.summary;
  nlohmann::ordered_json j;
  j["config"] = config_to_json(trace.config);
  nlohmann::ordered_json sum;
  sum["lambda2"] = s.lambda2;
  sum["theta"] = s.theta;
  sum["theta_tilde"] = s.theta_tilde;
  sum["gamma"] = s.gamma;
  sum["eta0"] = s.eta0;
  sum["p"] = s.p;
  sum["iterations"] = s.iterations;
  sum["diverged"] = s.diverged;
  sum["final_subopt"] = optional_number(s.final_subopt);
  sum["weighted_subopt"] = optional_number(s.weighted_subopt);
  sum["max_identity_residual"] = s.max_identity_residual;
  nlohmann::ordered_json hits = nlohmann::ordered_json::array();
  for (const auto& [eps, hit] : s.hits) {
    hits.push_back({{"eps", eps}, {"iterations", hit ? nlohmann::ordered_json(*hit) : nlohmann::ordered_json(nullptr)}});
  }
  sum["hits"] = hits;
  j["summary"] = sum;
  return j.dump(2) + "\n";
}

void write_summary(const Trace& trace, const std::string& path) { write_text(path, summary_json(trace)); }

std::string sweep_to_csv(const SweepResult& sweep) {
  std::string out = "algorithm,agents,theta,theta_tilde,mean_iters,std_iters,censored\n";
  for (const auto& r : sweep.rows) {
    out += to_string(r.algo) + ',' + std::to_string(r.agents);
    for (double v : {r.theta, r.theta_tilde, r.mean_iters, r.std_iters}) {
      out += ',';
      append_double(out, v);
    }
    out += ',' + std::to_string(r.censored) + '\n';
  }
  return out;
}

}  // namespace gtsim
