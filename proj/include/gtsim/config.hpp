#pragma once

#include "gtsim/algorithms.hpp"
#include "gtsim/objectives.hpp"
#include "gtsim/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gtsim {

enum class MixingVariant { metropolis, lazy_metropolis, random_gossip };

std::string to_string(MixingVariant v);
MixingVariant parse_mixing(std::string_view name);

/// How the baseline's step is chosen: the theta^2-scaled template, or a
/// search over step sizes that keeps the best run.
enum class DsgtStep { theory, tuned };

std::string to_string(DsgtStep v);
DsgtStep parse_dsgt_step(std::string_view name);

struct ProblemConfig {
  int dim = 5;
  double mu = 0.5;
  double L = 4.0;
  double sigma = 0.0;
  double heterogeneity = 1.0;
  std::uint64_t seed = 1;
  bool operator==(const ProblemConfig&) const = default;
};

struct ScheduleConfig {
  ScheduleMode mode = ScheduleMode::constant;
  double step_multiplier = 1.0;
  DsgtStep dsgt_step = DsgtStep::tuned;
  std::optional<double> eta;  // explicit constant step, overrides the template
  bool operator==(const ScheduleConfig&) const = default;
};

struct SeedConfig {
  std::uint64_t noise = 1;
  std::uint64_t zeta = 2;
  std::uint64_t gossip = 3;
  bool operator==(const SeedConfig&) const = default;
};

struct SweepConfig {
  std::vector<int> agents{8, 16, 32};
  std::vector<Algorithm> algorithms{Algorithm::dsgt, Algorithm::ssdsgt, Algorithm::assdsgt};
  int seeds = 5;
  bool operator==(const SweepConfig&) const = default;
};

struct OutputConfig {
  std::string trace;
  std::string summary;
  std::string plot;
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  std::string label = "run";
  TopologyKind topology = TopologyKind::ring;
  int agents = 8;
  MixingVariant mixing = MixingVariant::metropolis;
  Algorithm algorithm = Algorithm::ssdsgt;
  ProblemConfig problem;
  std::optional<std::vector<double>> x0;  // zeros when absent
  ScheduleConfig schedule;
  long iters = 1000;
  long stride = 1;
  SeedConfig seeds;
  std::vector<double> eps{1e-6};
  bool stop_at_eps = false;
  double alpha = 14.0;
  unsigned threads = 1;
  SweepConfig sweep;
  OutputConfig output;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  QuadraticSpec problem_spec() const;
  RowVector initial_point() const;
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
/// Strict: unknown keys and wrong types raise ConfigError with the dotted
/// field path. Missing keys keep their defaults. The result is validated.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace gtsim
