#include "gtsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

namespace gtsim {

namespace {

constexpr double kDivergence = 1e100;

struct Setup {
  QuadraticProblem problem;
  Graph graph;
  std::optional<MixingMatrix> w;         // fixed matrix, absent for gossip
  std::optional<AugmentedMixing> aw;
  Schedule sched;
  TraceSummary info;
};

Setup make_setup(const ExperimentConfig& cfg) {
  Setup s{make_quadratic_suite(cfg.problem_spec()), build_graph(cfg.topology, cfg.agents), {}, {}, {}, {}};
  const double L = cfg.problem.L;
  const double mu = cfg.problem.mu;
  const double mult = cfg.schedule.step_multiplier;

  if (cfg.mixing == MixingVariant::random_gossip) {
    if (!s.graph.connected()) throw ConfigError("topology", "random gossip needs a connected graph");
    const SpectralGap gap = expected_gossip_gap(s.graph);
    s.info.lambda2 = gap.lambda2;
    s.info.theta = gap.theta;
  } else {
    MixingMatrix w = metropolis_mixing(s.graph);
    if (cfg.mixing == MixingVariant::lazy_metropolis) w = lazify(w);
    s.info.lambda2 = w.lambda2();
    s.info.theta = w.theta();
    s.w = std::move(w);
  }

  switch (cfg.algorithm) {
    case Algorithm::ssdsgt:
      s.sched = Schedule::ssdsgt(cfg.schedule.mode, s.info.theta, L, mu, mult);
      break;
    case Algorithm::assdsgt: {
      if (!s.w || !s.w->psd()) throw ConfigError("mixing", "assdsgt needs a fixed positive semi-definite matrix");
      s.info.gamma = s.w->agents() > 1 ? default_gamma(s.w->lambda2()) : 0.0;
      s.aw.emplace(*s.w, s.info.gamma);
      s.info.theta_tilde = fit_chebyshev_contraction(*s.aw).theta_tilde;
      s.sched = Schedule::assdsgt(cfg.schedule.mode, s.info.theta_tilde, L, mu, mult);
      break;
    }
    case Algorithm::dsgt:
      s.sched = Schedule::dsgt(cfg.schedule.mode, s.info.theta, L, mu, mult);
      break;
  }
  if (cfg.schedule.eta) {
    s.sched.mode = ScheduleMode::constant;
    s.sched.eta0 = *cfg.schedule.eta;
  }
  s.info.eta0 = s.sched.step_size(0);
  s.info.p = s.sched.p;
  return s;
}

double rms_rows(const Eigen::Ref<const Matrix>& a) {
  return std::sqrt(a.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(a.rows(), 1)));
}

// Adapters giving the run loop a uniform view of the three state types.
struct SsOps {
  const Setup& s;
  SsState init(const RowVector& x0, StepContext ctx) const { return init_ssdsgt(x0, ctx); }
  void step(SsState& st, double eta, StepContext ctx) const {
    ssdsgt_step(st, *s.w, eta, s.sched.p, ctx);
  }
  void step_gossip(SsState& st, const MixingMatrix& w, double eta, StepContext ctx) const {
    ssdsgt_step(st, w, eta, s.sched.p, ctx);
  }
  static auto x(const SsState& st) { return Eigen::Ref<const Matrix>(st.x); }
  static const Matrix& grads(const SsState& st) { return st.g_x; }
  IterRecord record(const SsState& st, double eta, const ExperimentConfig&) const {
    return record_iteration(st, s.problem, eta, s.info.theta);
  }
};

struct AssOps {
  const Setup& s;
  AssState init(const RowVector& x0, StepContext ctx) const { return init_assdsgt(x0, ctx); }
  void step(AssState& st, double eta, StepContext ctx) const {
    assdsgt_step(st, *s.aw, eta, s.sched.p, ctx);
  }
  void step_gossip(AssState&, const MixingMatrix&, double, StepContext) const {
    throw ConfigError("mixing", "assdsgt works only on a static network");
  }
  static auto x(const AssState& st) { return Eigen::Ref<const Matrix>(st.x_aug.topRows(st.agents())); }
  static const Matrix& grads(const AssState& st) { return st.g_x; }
  IterRecord record(const AssState& st, double eta, const ExperimentConfig& cfg) const {
    return record_iteration(st, s.problem, eta, s.info.theta_tilde, cfg.alpha);
  }
};

struct DsgtOps {
  const Setup& s;
  DsgtState init(const RowVector& x0, StepContext ctx) const { return init_dsgt(x0, ctx); }
  void step(DsgtState& st, double eta, StepContext ctx) const { dsgt_step(st, *s.w, eta, ctx); }
  void step_gossip(DsgtState& st, const MixingMatrix& w, double eta, StepContext ctx) const {
    dsgt_step(st, w, eta, ctx);
  }
  static auto x(const DsgtState& st) { return Eigen::Ref<const Matrix>(st.x); }
  static const Matrix& grads(const DsgtState& st) { return st.g_used; }
  IterRecord record(const DsgtState& st, double eta, const ExperimentConfig&) const {
    return record_iteration(st, s.problem, eta, s.info.theta);
  }
};

template <typename Ops>
Trace run_loop(const ExperimentConfig& cfg, const Setup& setup, const Ops& ops, const RunOptions& opts) {
  const QuadraticProblem& problem = setup.problem;
  const Schedule& sched = setup.sched;
  const bool noisy = cfg.problem.sigma > 0.0;
  const long T = cfg.iters;

  RandomStreams streams(cfg.agents, cfg.seeds.noise, cfg.seeds.zeta, cfg.seeds.gossip);
  std::optional<WorkerPool> pool;
  if (cfg.threads > 1) pool.emplace(cfg.threads);
  StepContext ctx{problem, streams, pool ? &*pool : nullptr};

  Trace trace;
  trace.config = cfg;
  trace.summary = setup.info;
  for (double e : cfg.eps) trace.summary.hits[e] = std::nullopt;

  auto st = ops.init(cfg.initial_point(), ctx);
  WeightedAverager avg(problem.mu());

  auto audit = [&](const auto& state, long t) {
    const double r = audit_identities(state).max();
    trace.summary.max_identity_residual = std::max(trace.summary.max_identity_residual, r);
    if (!(r <= opts.audit_tolerance)) {
      std::ostringstream msg;
      msg << "structural identity residual " << r << " exceeds " << opts.audit_tolerance;
      throw InvariantViolation(t, msg.str());
    }
  };
  auto check_hits = [&](long t, double value) {
    bool all = true;
    for (auto& [e, hit] : trace.summary.hits) {
      if (!hit && value <= e) hit = t;
      all = all && hit.has_value();
    }
    return all && !trace.summary.hits.empty();
  };
  auto emit = [&](const IterRecord& rec) {
    trace.records.push_back(rec);
    trace.weighted.push_back(avg.average());
  };

  RowVector xbar = ops.x(st).colwise().mean();
  double subopt = problem.global_suboptimality(xbar);
  avg.push(sched.step_size(0), subopt);
  audit(st, 0);
  {
    const IterRecord rec = ops.record(st, sched.step_size(0), cfg);
    emit(rec);
    if (opts.on_iteration) opts.on_iteration(rec);
  }
  bool done = check_hits(0, noisy ? avg.average() : subopt) && cfg.stop_at_eps;

  long t = 0;
  while (t < T && !done) {
    const double eta = sched.step_size(t);
    if (setup.w) {
      ops.step(st, eta, ctx);
    } else {
      ops.step_gossip(st, random_edge_gossip(setup.graph, streams.gossip()), eta, ctx);
    }
    ++t;

    // Mean dynamics: xbar <- xbar - eta * mean(gradients that drove the step).
    const RowVector next = ops.x(st).colwise().mean();
    const RowVector gbar = ops.grads(st).colwise().mean();
    const double drift = (next - (xbar - eta * gbar)).norm();
    const double scale =
        std::max({xbar.norm(), rms_rows(ops.x(st)), eta * rms_rows(ops.grads(st)), 1e-300});
    xbar = next;
    subopt = problem.global_suboptimality(xbar);
    if (!std::isfinite(subopt) || subopt > kDivergence) {
      trace.summary.diverged = true;
      break;
    }
    if (!(drift <= opts.audit_tolerance * scale)) {
      std::ostringstream msg;
      msg << "mean-dynamics residual " << drift / scale << " exceeds " << opts.audit_tolerance;
      throw InvariantViolation(t, msg.str());
    }

    const double eta_next = sched.step_size(t);
    avg.push(eta_next, subopt);
    done = check_hits(t, noisy ? avg.average() : subopt) && cfg.stop_at_eps;

    const bool recorded = (t % cfg.stride == 0) || t == T || done;
    if (recorded) audit(st, t);
    if (recorded || opts.on_iteration) {
      const IterRecord rec = ops.record(st, eta_next, cfg);
      if (recorded) emit(rec);
      if (opts.on_iteration) opts.on_iteration(rec);
    }
  }
  if (trace.summary.diverged) {
    // Close the trace with the state that tripped the divergence check.
    trace.records.push_back(ops.record(st, sched.step_size(t), cfg));
    trace.weighted.push_back(avg.average());
  }

  trace.summary.iterations = t;
  trace.summary.final_subopt = subopt;
  trace.summary.weighted_subopt = avg.average();
  return trace;
}

Trace run_resolved(const ExperimentConfig& cfg, const RunOptions& opts) {
  const Setup setup = make_setup(cfg);
  switch (cfg.algorithm) {
    case Algorithm::ssdsgt: return run_loop(cfg, setup, SsOps{setup}, opts);
    case Algorithm::assdsgt: return run_loop(cfg, setup, AssOps{setup}, opts);
    case Algorithm::dsgt: return run_loop(cfg, setup, DsgtOps{setup}, opts);
  }
  throw std::logic_error("unreachable");
}

struct Score {
  double iters;   // +inf if the threshold was not reached
  double value;
  bool operator<(const Score& o) const { return iters < o.iters || (iters == o.iters && value < o.value); }
};

}  // namespace

TuneResult tune_dsgt_step(const ExperimentConfig& cfg) {
  const bool noisy = cfg.problem.sigma > 0.0;
  const std::optional<double> target =
      cfg.eps.empty() ? std::nullopt : std::optional(*std::min_element(cfg.eps.begin(), cfg.eps.end()));
  constexpr double kInf = std::numeric_limits<double>::infinity();

  TuneResult best;
  std::optional<Score> best_score;
  for (int k = 0; k < 60; ++k) {
    ExperimentConfig c = cfg;
    c.algorithm = Algorithm::dsgt;
    c.stride = c.iters;
    c.threads = 1;
    c.schedule.dsgt_step = DsgtStep::theory;
    if (noisy) {
      // Grow the multiplier on the decaying template until it stops helping.
      c.schedule.step_multiplier = cfg.schedule.step_multiplier * std::ldexp(1.0, k);
    } else {
      c.schedule.eta = std::ldexp(1.0, -k) / cfg.problem.L;
      c.stop_at_eps = target.has_value();
      if (target) c.eps = {*target};
    }
    const Trace tr = run_resolved(c, {});
    ++best.trials;
    if (tr.summary.diverged) {
      if (noisy) break;
      continue;
    }
    std::optional<long> hit;
    if (target) {
      auto it = tr.summary.hits.find(*target);
      if (it != tr.summary.hits.end()) hit = it->second;
    }
    const double value = noisy ? tr.summary.weighted_subopt : tr.summary.final_subopt;
    const Score score{hit && !noisy ? static_cast<double>(*hit) : (noisy ? 0.0 : kInf), value};
    if (!best_score || score < *best_score) {
      best_score = score;
      best.eta = tr.summary.eta0;
      best.multiplier = c.schedule.step_multiplier;
      best.iterations = hit;
      best.final_subopt = value;
    } else {
      break;
    }
  }
  if (!best_score) throw std::runtime_error("baseline step search found no stable step size");
  return best;
}

Trace run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (cfg.algorithm == Algorithm::dsgt && cfg.schedule.dsgt_step == DsgtStep::tuned && !cfg.schedule.eta) {
    const TuneResult tuned = tune_dsgt_step(cfg);
    ExperimentConfig resolved = cfg;
    resolved.schedule.dsgt_step = DsgtStep::theory;
    if (cfg.problem.sigma > 0.0) {
      resolved.schedule.step_multiplier = tuned.multiplier;
    } else {
      resolved.schedule.eta = tuned.eta;
    }
    Trace trace = run_resolved(resolved, opts);
    trace.config = cfg;
    return trace;
  }
  return run_resolved(cfg, opts);
}

std::optional<long> iterations_to_epsilon(const Trace& trace, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const bool noisy = trace.config.problem.sigma > 0.0;
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const double v = noisy ? trace.weighted.at(k) : trace.records[k].subopt;
    if (v <= eps) return trace.records[k].t;
  }
  return std::nullopt;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

SweepResult sweep_topology(const ExperimentConfig& base, double eps) {
  base.validate();
  if (!(eps > 0.0)) throw ConfigError("eps", "threshold must be positive");
  // Checked here rather than in validate() so a single grid run is not held
  // to the default sweep list.
  if (base.topology == TopologyKind::grid) {
    for (int m : base.sweep.agents) {
      const int r = static_cast<int>(std::lround(std::sqrt(m)));
      if (r * r != m) throw ConfigError("sweep.agents", "grid topology needs perfect-square agent counts");
    }
  }

  struct Job {
    std::size_t row;
    ExperimentConfig cfg;
  };
  SweepResult result;
  result.eps = eps;
  std::vector<Job> jobs;
  for (Algorithm algo : base.sweep.algorithms) {
    for (int m : base.sweep.agents) {
      SweepRow row{algo, m, 0.0, 0.0, 0.0, 0.0, 0, {}};
      row.iters.assign(static_cast<std::size_t>(base.sweep.seeds), 0);
      result.rows.push_back(row);
      for (int k = 0; k < base.sweep.seeds; ++k) {
        ExperimentConfig c = base;
        c.agents = m;
        c.algorithm = algo;
        if (algo == Algorithm::assdsgt) c.mixing = MixingVariant::lazy_metropolis;
        c.seeds.noise += static_cast<std::uint64_t>(k);
        c.seeds.zeta += static_cast<std::uint64_t>(k);
        c.seeds.gossip += static_cast<std::uint64_t>(k);
        c.eps = {eps};
        c.stop_at_eps = true;
        c.stride = c.iters;
        c.threads = 1;
        c.output = {};
        c.validate();
        jobs.push_back({result.rows.size() - 1, std::move(c)});
      }
    }
  }

  std::vector<TraceSummary> summaries(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  WorkerPool pool(std::max(1u, base.threads));
  pool.parallel_for(static_cast<int>(jobs.size()), [&](int j) {
    try {
      summaries[static_cast<std::size_t>(j)] = run_experiment(jobs[static_cast<std::size_t>(j)].cfg).summary;
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  });
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<int> filled(result.rows.size(), 0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    SweepRow& row = result.rows[jobs[j].row];
    const TraceSummary& s = summaries[j];
    row.theta = s.theta;
    row.theta_tilde = s.theta_tilde;
    const auto hit = s.hits.at(eps);
    if (!hit || s.diverged) ++row.censored;
    row.iters[static_cast<std::size_t>(filled[jobs[j].row]++)] = hit && !s.diverged ? *hit : jobs[j].cfg.iters;
  }
  for (SweepRow& row : result.rows) {
    const double n = static_cast<double>(row.iters.size());
    double mean = 0.0;
    for (long v : row.iters) mean += static_cast<double>(v);
    mean /= n;
    double var = 0.0;
    for (long v : row.iters) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    row.mean_iters = mean;
    row.std_iters = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  }

  for (Algorithm algo : base.sweep.algorithms) {
    std::vector<double> x;
    std::vector<double> y;
    for (const SweepRow& row : result.rows) {
      if (row.algo != algo) continue;
      x.push_back(std::log(1.0 / row.theta));
      y.push_back(std::log(std::max(row.mean_iters, 1.0)));
    }
    result.exponents.push_back({algo, fit_slope(x, y)});
  }
  return result;
}

}  // namespace gtsim
