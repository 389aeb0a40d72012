// Command-line front end: run, sweep, plot, validate-mixing.

#include "gtsim/config.hpp"
#include "gtsim/harness.hpp"
#include "gtsim/plot.hpp"
#include "gtsim/topology.hpp"
#include "gtsim/trace_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace gtsim;

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> topology;
  std::optional<int> agents;
  std::optional<std::string> algo;
  std::optional<std::string> mixing;
  std::optional<double> sigma;
  std::optional<long> iters;
  std::optional<long> stride;
  std::vector<double> eps;
  std::optional<double> step_multiplier;
  std::optional<unsigned> threads;
  std::optional<std::string> label;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--seed", o.seed, "Run seed (noise, coin and gossip streams)");
  cmd->add_option("--topology", o.topology, "ring | grid | star | complete");
  cmd->add_option("--agents", o.agents, "Number of agents");
  cmd->add_option("--algo", o.algo, "dsgt | ssdsgt | assdsgt");
  cmd->add_option("--mixing", o.mixing, "metropolis | lazy-metropolis | random-gossip");
  cmd->add_option("--sigma", o.sigma, "Gradient noise scale");
  cmd->add_option("--iters", o.iters, "Iteration budget");
  cmd->add_option("--stride", o.stride, "Record every k-th iteration");
  cmd->add_option("--eps", o.eps, "Suboptimality thresholds");
  cmd->add_option("--step-multiplier", o.step_multiplier, "Scale applied to the schedule's step");
  cmd->add_option("--threads", o.threads, "Worker threads");
  cmd->add_option("--label", o.label, "Series label");
}

template <typename T, typename F>
void parse_field(const std::string& field, const std::string& text, T& out, F parse) {
  try {
    out = parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seeds = {*o.seed, *o.seed, *o.seed};
  if (o.topology) parse_field("topology", *o.topology, c.topology, parse_topology);
  if (o.agents) c.agents = *o.agents;
  if (o.algo) {
    parse_field("algorithm", *o.algo, c.algorithm, parse_algorithm);
    // The augmented method needs the lazy matrix; switch unless the user chose.
    if (c.algorithm == Algorithm::assdsgt && !o.mixing && c.mixing == MixingVariant::metropolis) {
      c.mixing = MixingVariant::lazy_metropolis;
    }
  }
  if (o.mixing) parse_field("mixing", *o.mixing, c.mixing, parse_mixing);
  if (o.sigma) c.problem.sigma = *o.sigma;
  if (o.iters) c.iters = *o.iters;
  if (o.stride) c.stride = *o.stride;
  if (!o.eps.empty()) c.eps = o.eps;
  if (o.step_multiplier) c.schedule.step_multiplier = *o.step_multiplier;
  if (o.threads) c.threads = *o.threads;
  if (o.label) c.label = *o.label;
  c.validate();
  return c;
}

void print_summary(const Trace& tr) {
  const TraceSummary& s = tr.summary;
  std::printf("algorithm        %s\n", to_string(tr.config.algorithm).c_str());
  std::printf("agents           %d (%s, %s)\n", tr.config.agents, to_string(tr.config.topology).c_str(),
              to_string(tr.config.mixing).c_str());
  std::printf("lambda2          %.10g\n", s.lambda2);
  std::printf("theta            %.10g\n", s.theta);
  if (tr.config.algorithm == Algorithm::assdsgt) {
    std::printf("gamma            %.10g\n", s.gamma);
    std::printf("theta_tilde      %.10g\n", s.theta_tilde);
  }
  std::printf("eta0             %.10g\n", s.eta0);
  std::printf("p                %.10g\n", s.p);
  std::printf("iterations       %ld%s\n", s.iterations, s.diverged ? " (diverged)" : "");
  std::printf("final subopt     %.6e\n", s.final_subopt);
  std::printf("weighted subopt  %.6e\n", s.weighted_subopt);
  std::printf("identity resid   %.3e\n", s.max_identity_residual);
  for (const auto& [eps, hit] : s.hits) {
    if (hit) {
      std::printf("hits %-11.3g %ld\n", eps, *hit);
    } else {
      std::printf("hits %-11.3g not reached\n", eps);
    }
  }
}

int cmd_run(const Overrides& o, const std::string& out, const std::string& summary, const std::string& plot) {
  ExperimentConfig c = resolve(o);
  if (!out.empty()) c.output.trace = out;
  if (!summary.empty()) c.output.summary = summary;
  if (!plot.empty()) c.output.plot = plot;
  const Trace tr = run_experiment(c);
  print_summary(tr);
  if (!c.output.trace.empty()) write_trace(tr, c.output.trace);
  if (!c.output.summary.empty()) write_summary(tr, c.output.summary);
  if (!c.output.plot.empty()) emit_plot(std::vector<Trace>{tr}, c.output.plot);
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& out, const std::vector<int>& agents,
              const std::vector<std::string>& algos, std::optional<int> seeds) {
  ExperimentConfig c = resolve(o);
  if (!agents.empty()) c.sweep.agents = agents;
  if (!algos.empty()) {
    c.sweep.algorithms.clear();
    for (const auto& a : algos) {
      Algorithm parsed{};
      parse_field("sweep.algorithms", a, parsed, parse_algorithm);
      c.sweep.algorithms.push_back(parsed);
    }
  }
  if (seeds) c.sweep.seeds = *seeds;
  c.validate();
  const double eps = c.eps.empty() ? 1e-6 : *std::min_element(c.eps.begin(), c.eps.end());
  const SweepResult res = sweep_topology(c, eps);
  const std::string table = sweep_to_csv(res);
  std::fputs(table.c_str(), stdout);
  for (const auto& e : res.exponents) {
    std::printf("exponent %s %.4f\n", to_string(e.algo).c_str(), e.exponent);
  }
  if (!out.empty()) write_text(out, table);
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::vector<std::string>& labels,
             const std::string& out) {
  if (inputs.empty()) throw std::invalid_argument("plot needs at least one trace file");
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string label =
        i < labels.size() ? labels[i] : std::filesystem::path(inputs[i]).stem().string();
    series.push_back({label, read_trace(inputs[i])});
  }
  emit_plot(series, out);
  std::printf("wrote %s (%zu series)\n", out.c_str(), series.size());
  return 0;
}

int cmd_validate_mixing(const Overrides& o) {
  const ExperimentConfig c = resolve(o);
  const Graph g = build_graph(c.topology, c.agents);
  std::printf("topology   %s, %d agents, %zu edges\n", to_string(c.topology).c_str(), c.agents, g.edges().size());
  if (c.mixing == MixingVariant::random_gossip) {
    const SpectralGap gap = expected_gossip_gap(g);
    std::printf("lambda2(E[W^T W])  %.12g\n", gap.lambda2);
    std::printf("theta_eff          %.12g\n", gap.theta);
    return 0;
  }
  MixingMatrix w = metropolis_mixing(g);
  if (c.mixing == MixingVariant::lazy_metropolis) w = lazify(w);
  const Matrix& e = w.entries();
  const double row_dev = (e.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double asym = (e - e.transpose()).cwiseAbs().maxCoeff();
  std::printf("mixing     %s\n", to_string(c.mixing).c_str());
  std::printf("row sum deviation  %.3e\n", row_dev);
  std::printf("asymmetry          %.3e\n", asym);
  std::printf("lambda2            %.12g\n", w.lambda2());
  std::printf("theta              %.12g\n", w.theta());
  std::printf("psd                %s\n", w.psd() ? "yes" : "no");
  if (w.psd() && w.agents() > 1) {
    const double gamma = default_gamma(w.lambda2());
    const ContractionFit fit = fit_chebyshev_contraction(chebyshev_augment(w, gamma));
    std::printf("gamma              %.12g\n", gamma);
    std::printf("theta_tilde (fit)  %.12g\n", fit.theta_tilde);
    std::printf("sqrt(1-lambda2)    %.12g\n", std::sqrt(1.0 - w.lambda2()));
    std::printf("envelope alpha=%g   %s\n", c.alpha, fit.envelope_holds(c.alpha) ? "holds" : "violated");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient-tracking simulator"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, mix_o;
  std::string run_out, run_summary, run_plot, sweep_out, plot_out;
  std::vector<int> sweep_agents;
  std::vector<std::string> sweep_algos, plot_inputs, plot_labels;
  std::optional<int> sweep_seeds;

  auto* run = app.add_subcommand("run", "Run one experiment and write its trace");
  add_overrides(run, run_o);
  run->add_option("--out", run_out, "Trace CSV path");
  run->add_option("--summary", run_summary, "Summary JSON path");
  run->add_option("--plot", run_plot, "SVG plot path");

  auto* sweep = app.add_subcommand("sweep", "Iterations to eps across agent counts and methods");
  add_overrides(sweep, sweep_o);
  sweep->add_option("--out", sweep_out, "Table CSV path");
  sweep->add_option("--sweep-agents", sweep_agents, "Agent counts");
  sweep->add_option("--sweep-algos", sweep_algos, "Methods to compare");
  sweep->add_option("--sweep-seeds", sweep_seeds, "Seeds per combination");

  auto* plot = app.add_subcommand("plot", "Overlay trace CSVs in an SVG");
  plot->add_option("traces", plot_inputs, "Trace CSV files")->required();
  plot->add_option("--label", plot_labels, "Series labels, in input order");
  plot->add_option("--out", plot_out, "SVG path")->required();

  auto* mixing = app.add_subcommand("validate-mixing", "Print spectral data for a topology");
  add_overrides(mixing, mix_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_o, run_out, run_summary, run_plot);
    if (*sweep) return cmd_sweep(sweep_o, sweep_out, sweep_agents, sweep_algos, sweep_seeds);
    if (*plot) return cmd_plot(plot_inputs, plot_labels, plot_out);
    if (*mixing) return cmd_validate_mixing(mix_o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation at " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
