#pragma once

#include "gtsim/config.hpp"
#include "gtsim/diagnostics.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gtsim {

struct TraceSummary {
  double lambda2 = 0.0;
  double theta = 1.0;        // gap of the matrix the method mixes with (expected gap for gossip)
  double theta_tilde = 0.0;  // augmented method only
  double gamma = 0.0;
  double eta0 = 0.0;
  double p = 1.0;
  long iterations = 0;       // steps actually taken
  bool diverged = false;
  double final_subopt = 0.0;
  double weighted_subopt = 0.0;
  double max_identity_residual = 0.0;
  /// First iteration whose suboptimality (weighted average when sigma > 0)
  /// is <= eps, checked at every iteration regardless of stride.
  std::map<double, std::optional<long>> hits;
};

struct Trace {
  ExperimentConfig config;
  std::vector<IterRecord> records;
  std::vector<double> weighted;  // weighted-average suboptimality at each record
  TraceSummary summary;
};

struct RunOptions {
  /// Called after every iteration (and once at t = 0) with a full record.
  std::function<void(const IterRecord&)> on_iteration;
  /// Identity audit tolerance (relative).
  double audit_tolerance = 1e-7;
};

/// Deterministic in the config. Identities are audited at every recorded
/// iteration and the mean dynamics after every step; a violation throws
/// InvariantViolation. A baseline run with a tuned step first runs the step
/// search.
Trace run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// First recorded t with suboptimality <= eps (weighted average when the
/// run is noisy); nullopt if never reached.
std::optional<long> iterations_to_epsilon(const Trace& trace, double eps);

struct TuneResult {
  double eta = 0.0;         // first step of the chosen schedule
  double multiplier = 1.0;  // noisy runs: chosen multiplier on the decaying template
  std::optional<long> iterations;  // to the smallest eps of the config
  double final_subopt = 0.0;
  int trials = 0;
};

/// Noiseless: halving search over constant steps from 1/L, keeping the one
/// with the fewest iterations to the smallest threshold. Noisy: doubling
/// search over multipliers of the decaying template, keeping the lowest
/// final weighted suboptimality.
TuneResult tune_dsgt_step(const ExperimentConfig& cfg);

struct SweepRow {
  Algorithm algo;
  int agents;
  double theta;        // gap of the mixing matrix used by this method
  double theta_tilde;  // augmented method only, 0 otherwise
  double mean_iters;
  double std_iters;
  int censored;        // runs that never reached eps (counted at their budget)
  std::vector<long> iters;
};

struct SweepExponent {
  Algorithm algo;
  double exponent;  // slope of log(mean iterations) against log(1/theta)
};

struct SweepResult {
  double eps = 0.0;
  std::vector<SweepRow> rows;
  std::vector<SweepExponent> exponents;
};

/// Runs every (algorithm, agent count, seed) combination from cfg.sweep to
/// the threshold, in parallel across runs with cfg.threads workers. The
/// augmented method is moved to lazy mixing automatically.
SweepResult sweep_topology(const ExperimentConfig& base, double eps);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gtsim
