#pragma once

#include "gtsim/objectives.hpp"
#include "gtsim/parallel.hpp"
#include "gtsim/rng.hpp"
#include "gtsim/topology.hpp"
#include "gtsim/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace gtsim {

enum class Algorithm { dsgt, ssdsgt, assdsgt };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

enum class ScheduleMode { constant, decaying };

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view name);

/// Step-size rule and snapshot probability. Constant mode returns eta0;
/// decaying mode returns 6 beta / (L + beta mu t).
struct Schedule {
  Algorithm algo = Algorithm::ssdsgt;
  ScheduleMode mode = ScheduleMode::constant;
  double eta0 = 0.0;
  double beta = 0.0;
  double L = 1.0;
  double mu = 1.0;
  double p = 1.0;

  double step_size(long t) const;

  /// eta = theta/(192 L) or beta = theta/1152, p = theta.
  static Schedule ssdsgt(ScheduleMode mode, double theta, double L, double mu,
                         double multiplier = 1.0);
  /// eta = theta~/(768 L) or beta~ = theta~/4608, p = theta~.
  static Schedule assdsgt(ScheduleMode mode, double theta_tilde, double L, double mu,
                          double multiplier = 1.0);
  /// Baseline convention: the SS template with theta replaced by theta^2.
  static Schedule dsgt(ScheduleMode mode, double theta, double L, double mu,
                       double multiplier = 1.0);
  /// Constant step for the baseline, used by the tuning search.
  static Schedule dsgt_constant(double eta, double L, double mu);
};

/// Shared per-run resources for a step. `pool` may be null for serial
/// gradient evaluation.
struct StepContext {
  const QuadraticProblem& problem;
  RandomStreams& streams;
  WorkerPool* pool = nullptr;
};

struct SsState {
  Matrix x;
  Matrix s;
  Matrix q;
  Matrix g_snap;
  long tau = 0;
  long t = 0;

  // Filled by each step: the stochastic gradients at the pre-step x, the
  // coin, and the step size used.
  Matrix g_x;
  bool zeta = false;
  double eta = 0.0;

  Matrix work;
};

struct AssState {
  Matrix x_aug;
  Matrix s_aug;
  Matrix q;
  Matrix g_snap;
  long tau = 0;
  long t = 0;

  Matrix g_x;
  bool zeta = false;
  double eta = 0.0;
  std::uint64_t operator_id = 0;

  Matrix work;

  int agents() const { return static_cast<int>(q.rows()); }
  auto x() const { return x_aug.topRows(q.rows()); }
  auto s_top() const { return s_aug.topRows(q.rows()); }
};

struct DsgtState {
  Matrix x;
  Matrix s;
  Matrix g_prev;
  long t = 0;

  // Gradients that drove the last x update (evaluated at the pre-step x).
  Matrix g_used;
  double eta = 0.0;

  Matrix work;
};

SsState init_ssdsgt(const RowVector& x0, StepContext ctx);
AssState init_assdsgt(const RowVector& x0, StepContext ctx);
DsgtState init_dsgt(const RowVector& x0, StepContext ctx);

/// One iteration: one shared coin with success probability p, gradients at
/// the current x, x <- W(x - eta (s + g_x - g_snap)), tracker and snapshot
/// refresh on success.
void ssdsgt_step(SsState& state, const MixingMatrix& w, double eta, double p, StepContext ctx);

/// Same update through the augmented operator, corrections duplicated into
/// both blocks. The operator must stay the same for the life of the state.
void assdsgt_step(AssState& state, const AugmentedMixing& aw, double eta, double p,
                  StepContext ctx);

/// x <- W(x - eta s); gradients at the new x; s <- W s + g_new - g_prev.
void dsgt_step(DsgtState& state, const MixingMatrix& w, double eta, StepContext ctx);

}  // namespace gtsim
