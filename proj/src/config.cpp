#include "gtsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

namespace gtsim {

using nlohmann::json;

std::string to_string(MixingVariant v) {
  switch (v) {
    case MixingVariant::metropolis: return "metropolis";
    case MixingVariant::lazy_metropolis: return "lazy-metropolis";
    case MixingVariant::random_gossip: return "random-gossip";
  }
  return "?";
}

MixingVariant parse_mixing(std::string_view name) {
  if (name == "metropolis") return MixingVariant::metropolis;
  if (name == "lazy-metropolis") return MixingVariant::lazy_metropolis;
  if (name == "random-gossip") return MixingVariant::random_gossip;
  throw std::invalid_argument("unknown mixing variant '" + std::string(name) + "'");
}

std::string to_string(DsgtStep v) { return v == DsgtStep::theory ? "theory" : "tuned"; }

DsgtStep parse_dsgt_step(std::string_view name) {
  if (name == "theory") return DsgtStep::theory;
  if (name == "tuned") return DsgtStep::tuned;
  throw std::invalid_argument("unknown baseline step rule '" + std::string(name) + "'");
}

namespace {

bool is_square(int m) {
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  return r * r == m;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(agents >= 1, "agents", "must be at least 1");
  require(topology != TopologyKind::grid || is_square(agents), "agents",
          "grid topology needs a perfect-square agent count");
  require(problem.dim >= 1, "problem.dim", "must be at least 1");
  require(problem.mu > 0.0 && std::isfinite(problem.mu), "problem.mu", "must be positive");
  require(problem.L >= problem.mu && std::isfinite(problem.L), "problem.L", "must be >= problem.mu");
  require(problem.sigma >= 0.0 && std::isfinite(problem.sigma), "problem.sigma", "must be non-negative");
  require(std::isfinite(problem.heterogeneity), "problem.heterogeneity", "must be finite");
  if (x0) require(static_cast<int>(x0->size()) == problem.dim, "x0", "length must equal problem.dim");
  require(schedule.step_multiplier > 0.0 && std::isfinite(schedule.step_multiplier),
          "schedule.step_multiplier", "must be positive");
  if (schedule.eta) require(*schedule.eta > 0.0 && std::isfinite(*schedule.eta), "schedule.eta", "must be positive");
  require(iters >= 1, "iters", "must be at least 1");
  require(stride >= 1, "stride", "must be at least 1");
  for (double e : eps) require(e > 0.0, "eps", "thresholds must be positive");
  require(alpha > 0.0, "alpha", "must be positive");
  require(threads >= 1, "threads", "must be at least 1");
  if (algorithm == Algorithm::assdsgt) {
    require(mixing != MixingVariant::random_gossip, "mixing",
            "assdsgt works only on a static network, not random gossip");
    require(mixing == MixingVariant::lazy_metropolis, "mixing",
            "assdsgt needs a positive semi-definite matrix; use lazy-metropolis");
  }
  require(!sweep.agents.empty(), "sweep.agents", "must not be empty");
  for (int m : sweep.agents) {
    require(m >= 1, "sweep.agents", "entries must be at least 1");
  }
  require(!sweep.algorithms.empty(), "sweep.algorithms", "must not be empty");
  require(sweep.seeds >= 1, "sweep.seeds", "must be at least 1");
}

QuadraticSpec ExperimentConfig::problem_spec() const {
  return QuadraticSpec{agents, problem.dim, problem.mu, problem.L, problem.heterogeneity,
                       problem.sigma, problem.seed};
}

RowVector ExperimentConfig::initial_point() const {
  if (!x0) return RowVector::Zero(problem.dim);
  return Eigen::Map<const RowVector>(x0->data(), static_cast<Eigen::Index>(x0->size()));
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["label"] = c.label;
  j["topology"] = to_string(c.topology);
  j["agents"] = c.agents;
  j["mixing"] = to_string(c.mixing);
  j["algorithm"] = to_string(c.algorithm);
  j["problem"] = {{"dim", c.problem.dim},
                  {"mu", c.problem.mu},
                  {"L", c.problem.L},
                  {"sigma", c.problem.sigma},
                  {"heterogeneity", c.problem.heterogeneity},
                  {"seed", c.problem.seed}};
  j["x0"] = c.x0 ? nlohmann::ordered_json(*c.x0) : nlohmann::ordered_json(nullptr);
  j["schedule"] = {{"mode", to_string(c.schedule.mode)},
                   {"step_multiplier", c.schedule.step_multiplier},
                   {"dsgt_step", to_string(c.schedule.dsgt_step)},
                   {"eta", c.schedule.eta ? nlohmann::ordered_json(*c.schedule.eta)
                                          : nlohmann::ordered_json(nullptr)}};
  j["iters"] = c.iters;
  j["stride"] = c.stride;
  j["seeds"] = {{"noise", c.seeds.noise}, {"zeta", c.seeds.zeta}, {"gossip", c.seeds.gossip}};
  j["eps"] = c.eps;
  j["stop_at_eps"] = c.stop_at_eps;
  j["alpha"] = c.alpha;
  j["threads"] = c.threads;
  nlohmann::ordered_json algos = nlohmann::ordered_json::array();
  for (auto a : c.sweep.algorithms) algos.push_back(to_string(a));
  j["sweep"] = {{"agents", c.sweep.agents}, {"algorithms", algos}, {"seeds", c.sweep.seeds}};
  j["output"] = {{"trace", c.output.trace}, {"summary", c.output.summary}, {"plot", c.output.plot}};
  return j;
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) throw ConfigError(join(path, it.key()), "unknown key");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void read(const json& j, const char* key, const std::string& path, double& out) {
  if (const json* v = find(j, key)) {
    if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
    out = v->get<double>();
  }
}

template <typename Int>
void read_int(const json& j, const char* key, const std::string& path, Int& out) {
  if (const json* v = find(j, key)) {
    if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v->is_number_unsigned()) throw ConfigError(join(path, key), "expected a non-negative integer");
      out = v->get<Int>();
    } else {
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max()) {
        throw ConfigError(join(path, key), "integer out of range");
      }
      out = static_cast<Int>(x);
    }
  }
}

void read(const json& j, const char* key, const std::string& path, bool& out) {
  if (const json* v = find(j, key)) {
    if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    out = v->get<bool>();
  }
}

void read(const json& j, const char* key, const std::string& path, std::string& out) {
  if (const json* v = find(j, key)) {
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    out = v->get<std::string>();
  }
}

template <typename Enum, typename Parser>
void read_enum(const json& j, const char* key, const std::string& path, Enum& out, Parser parse) {
  std::string name;
  if (!find(j, key)) return;
  read(j, key, path, name);
  try {
    out = parse(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(join(path, key), e.what());
  }
}

std::vector<double> read_doubles(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  check_keys(j, "",
             {"label", "topology", "agents", "mixing", "algorithm", "problem", "x0", "schedule", "iters",
              "stride", "seeds", "eps", "stop_at_eps", "alpha", "threads", "sweep", "output"});
  read(j, "label", "", c.label);
  read_enum(j, "topology", "", c.topology, parse_topology);
  read_int(j, "agents", "", c.agents);
  read_enum(j, "mixing", "", c.mixing, parse_mixing);
  read_enum(j, "algorithm", "", c.algorithm, parse_algorithm);

  if (const json* p = find(j, "problem")) {
    check_keys(*p, "problem", {"dim", "mu", "L", "sigma", "heterogeneity", "seed"});
    read_int(*p, "dim", "problem", c.problem.dim);
    read(*p, "mu", "problem", c.problem.mu);
    read(*p, "L", "problem", c.problem.L);
    read(*p, "sigma", "problem", c.problem.sigma);
    read(*p, "heterogeneity", "problem", c.problem.heterogeneity);
    read_int(*p, "seed", "problem", c.problem.seed);
  }
  if (const json* v = find(j, "x0"); v && !v->is_null()) c.x0 = read_doubles(*v, "x0");

  if (const json* s = find(j, "schedule")) {
    check_keys(*s, "schedule", {"mode", "step_multiplier", "dsgt_step", "eta"});
    read_enum(*s, "mode", "schedule", c.schedule.mode, parse_schedule_mode);
    read(*s, "step_multiplier", "schedule", c.schedule.step_multiplier);
    read_enum(*s, "dsgt_step", "schedule", c.schedule.dsgt_step, parse_dsgt_step);
    if (const json* e = find(*s, "eta"); e && !e->is_null()) {
      double eta = 0.0;
      read(*s, "eta", "schedule", eta);
      c.schedule.eta = eta;
    }
  }
  read_int(j, "iters", "", c.iters);
  read_int(j, "stride", "", c.stride);
  if (const json* s = find(j, "seeds")) {
    check_keys(*s, "seeds", {"noise", "zeta", "gossip"});
    read_int(*s, "noise", "seeds", c.seeds.noise);
    read_int(*s, "zeta", "seeds", c.seeds.zeta);
    read_int(*s, "gossip", "seeds", c.seeds.gossip);
  }
  if (const json* e = find(j, "eps")) c.eps = read_doubles(*e, "eps");
  read(j, "stop_at_eps", "", c.stop_at_eps);
  read(j, "alpha", "", c.alpha);
  read_int(j, "threads", "", c.threads);

  if (const json* s = find(j, "sweep")) {
    check_keys(*s, "sweep", {"agents", "algorithms", "seeds"});
    if (const json* a = find(*s, "agents")) {
      if (!a->is_array()) throw ConfigError("sweep.agents", "expected an array of integers");
      c.sweep.agents.clear();
      for (const auto& e : *a) {
        if (!e.is_number_integer()) throw ConfigError("sweep.agents", "expected an array of integers");
        c.sweep.agents.push_back(e.get<int>());
      }
    }
    if (const json* a = find(*s, "algorithms")) {
      if (!a->is_array()) throw ConfigError("sweep.algorithms", "expected an array of names");
      c.sweep.algorithms.clear();
      for (const auto& e : *a) {
        if (!e.is_string()) throw ConfigError("sweep.algorithms", "expected an array of names");
        try {
          c.sweep.algorithms.push_back(parse_algorithm(e.get<std::string>()));
        } catch (const std::invalid_argument& ex) {
          throw ConfigError("sweep.algorithms", ex.what());
        }
      }
    }
    read_int(*s, "seeds", "sweep", c.sweep.seeds);
  }
  if (const json* o = find(j, "output")) {
    check_keys(*o, "output", {"trace", "summary", "plot"});
    read(*o, "trace", "output", c.output.trace);
    read(*o, "summary", "output", c.output.summary);
    read(*o, "plot", "output", c.output.plot);
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError("", "parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
  out << config_to_json(cfg).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace gtsim
