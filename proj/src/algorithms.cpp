#include "gtsim/algorithms.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gtsim {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::dsgt: return "dsgt";
    case Algorithm::ssdsgt: return "ssdsgt";
    case Algorithm::assdsgt: return "assdsgt";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "dsgt") return Algorithm::dsgt;
  if (name == "ssdsgt") return Algorithm::ssdsgt;
  if (name == "assdsgt") return Algorithm::assdsgt;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::constant ? "constant" : "decaying";
}

ScheduleMode parse_schedule_mode(std::string_view name) {
  if (name == "constant") return ScheduleMode::constant;
  if (name == "decaying") return ScheduleMode::decaying;
  throw std::invalid_argument("unknown schedule mode '" + std::string(name) + "'");
}

double Schedule::step_size(long t) const {
  if (mode == ScheduleMode::constant) return eta0;
  return 6.0 * beta / (L + beta * mu * static_cast<double>(t));
}

namespace {

Schedule make_template(Algorithm algo, ScheduleMode mode, double gap, double const_div,
                       double beta_div, double L, double mu, double multiplier, double p) {
  if (!(gap > 0.0 && gap <= 1.0)) throw std::invalid_argument("spectral gap must lie in (0, 1]");
  if (!(L > 0.0) || !(mu > 0.0)) throw std::invalid_argument("need positive L and mu");
  if (!(multiplier > 0.0)) throw std::invalid_argument("step multiplier must be positive");
  Schedule s;
  s.algo = algo;
  s.mode = mode;
  s.L = L;
  s.mu = mu;
  s.p = p;
  s.eta0 = multiplier * gap / (const_div * L);
  s.beta = multiplier * gap / beta_div;
  if (mode == ScheduleMode::decaying) s.eta0 = 6.0 * s.beta / L;
  return s;
}

void check_shape(const Matrix& x, int rows, int cols, const char* what) {
  if (x.rows() != rows || x.cols() != cols) {
    throw std::invalid_argument(std::string(what) + " has shape " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", expected " + std::to_string(rows) +
                                "x" + std::to_string(cols));
  }
}

void check_problem(const RowVector& x0, const StepContext& ctx) {
  if (x0.size() != ctx.problem.dim()) throw std::invalid_argument("x0 dimension mismatch");
  if (ctx.streams.agents() != ctx.problem.agents()) {
    throw std::invalid_argument("random streams do not match agent count");
  }
}

// Per-agent stochastic gradients at the rows of x. Each agent draws from its
// own stream, so the result does not depend on how rows are split across
// workers.
template <typename Rows>
void sample_gradients(const Rows& x, Matrix& out, const StepContext& ctx) {
  const int m = ctx.problem.agents();
  auto body = [&](int i) {
    ctx.problem.stochastic_gradient_row(i, x.row(i), out.row(i), ctx.streams.agent(i));
  };
  if (ctx.pool != nullptr && ctx.pool->size() > 1) {
    ctx.pool->parallel_for(m, body);
  } else {
    for (int i = 0; i < m; ++i) body(i);
  }
}

void check_step(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("step size must be positive and finite");
}

bool draw_zeta(double p, Engine& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("snapshot probability must lie in [0, 1]");
  return std::bernoulli_distribution(p)(rng);
}

}  // namespace

Schedule Schedule::ssdsgt(ScheduleMode mode, double theta, double L, double mu, double multiplier) {
  return make_template(Algorithm::ssdsgt, mode, theta, 192.0, 1152.0, L, mu, multiplier, theta);
}

Schedule Schedule::assdsgt(ScheduleMode mode, double theta_tilde, double L, double mu,
                           double multiplier) {
  return make_template(Algorithm::assdsgt, mode, theta_tilde, 768.0, 4608.0, L, mu, multiplier,
                       theta_tilde);
}

Schedule Schedule::dsgt(ScheduleMode mode, double theta, double L, double mu, double multiplier) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("spectral gap must lie in (0, 1]");
  return make_template(Algorithm::dsgt, mode, theta * theta, 192.0, 1152.0, L, mu, multiplier, 1.0);
}

Schedule Schedule::dsgt_constant(double eta, double L, double mu) {
  if (!(eta > 0.0)) throw std::invalid_argument("step size must be positive");
  Schedule s;
  s.algo = Algorithm::dsgt;
  s.mode = ScheduleMode::constant;
  s.eta0 = eta;
  s.L = L;
  s.mu = mu;
  s.p = 1.0;
  return s;
}

SsState init_ssdsgt(const RowVector& x0, StepContext ctx) {
  check_problem(x0, ctx);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  SsState st;
  st.x = x0.replicate(m, 1);
  st.q = st.x;
  st.g_snap.resize(m, d);
  sample_gradients(st.x, st.g_snap, ctx);
  st.s = st.g_snap;
  st.g_x = st.g_snap;
  st.work.resize(m, d);
  return st;
}

AssState init_assdsgt(const RowVector& x0, StepContext ctx) {
  check_problem(x0, ctx);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  AssState st;
  st.q = x0.replicate(m, 1);
  st.x_aug = x0.replicate(2 * m, 1);
  st.g_snap.resize(m, d);
  sample_gradients(st.q, st.g_snap, ctx);
  st.s_aug.resize(2 * m, d);
  st.s_aug.topRows(m) = st.g_snap;
  st.s_aug.bottomRows(m) = st.g_snap;
  st.g_x = st.g_snap;
  st.work.resize(2 * m, d);
  return st;
}

DsgtState init_dsgt(const RowVector& x0, StepContext ctx) {
  check_problem(x0, ctx);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  DsgtState st;
  st.x = x0.replicate(m, 1);
  st.g_prev.resize(m, d);
  sample_gradients(st.x, st.g_prev, ctx);
  st.s = st.g_prev;
  st.g_used = st.g_prev;
  st.work.resize(m, d);
  return st;
}

void ssdsgt_step(SsState& st, const MixingMatrix& w, double eta, double p, StepContext ctx) {
  check_step(eta);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  if (w.agents() != m) throw std::invalid_argument("mixing matrix size does not match agent count");
  check_shape(st.x, m, d, "x");
  check_shape(st.s, m, d, "s");
  check_shape(st.q, m, d, "q");
  check_shape(st.g_snap, m, d, "g_snap");
  st.g_x.resize(m, d);
  st.work.resize(m, d);

  const bool zeta = draw_zeta(p, ctx.streams.zeta());
  sample_gradients(st.x, st.g_x, ctx);

  st.work = st.x - eta * (st.s + st.g_x - st.g_snap);
  if (zeta) st.q = st.x;
  w.apply(st.work, st.x);

  w.apply(st.s, st.work);
  if (zeta) {
    st.work += st.g_x - st.g_snap;
    st.g_snap = st.g_x;
    st.tau = st.t;
  }
  st.s.swap(st.work);

  st.zeta = zeta;
  st.eta = eta;
  ++st.t;
}

void assdsgt_step(AssState& st, const AugmentedMixing& aw, double eta, double p, StepContext ctx) {
  check_step(eta);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  if (aw.agents() != m) throw std::invalid_argument("mixing operator size does not match agent count");
  if (!aw.base().psd()) throw std::invalid_argument("augmented mixing needs a positive semi-definite base");
  if (st.operator_id != 0 && st.operator_id != aw.id()) {
    throw std::invalid_argument("the augmented method needs one fixed mixing operator per run");
  }
  check_shape(st.x_aug, 2 * m, d, "x_aug");
  check_shape(st.s_aug, 2 * m, d, "s_aug");
  check_shape(st.q, m, d, "q");
  check_shape(st.g_snap, m, d, "g_snap");
  st.operator_id = aw.id();
  st.g_x.resize(m, d);
  st.work.resize(2 * m, d);

  const bool zeta = draw_zeta(p, ctx.streams.zeta());
  sample_gradients(st.x_aug.topRows(m), st.g_x, ctx);

  // Same expression as the non-augmented step, one block at a time.
  st.work.topRows(m) = st.x_aug.topRows(m) - eta * (st.s_aug.topRows(m) + st.g_x - st.g_snap);
  st.work.bottomRows(m) =
      st.x_aug.bottomRows(m) - eta * (st.s_aug.bottomRows(m) + st.g_x - st.g_snap);
  if (zeta) st.q = st.x_aug.topRows(m);
  aw.apply(st.work, st.x_aug);

  aw.apply(st.s_aug, st.work);
  if (zeta) {
    st.work.topRows(m) += st.g_x - st.g_snap;
    st.work.bottomRows(m) += st.g_x - st.g_snap;
    st.g_snap = st.g_x;
    st.tau = st.t;
  }
  st.s_aug.swap(st.work);

  st.zeta = zeta;
  st.eta = eta;
  ++st.t;
}

void dsgt_step(DsgtState& st, const MixingMatrix& w, double eta, StepContext ctx) {
  check_step(eta);
  const int m = ctx.problem.agents();
  const int d = ctx.problem.dim();
  if (w.agents() != m) throw std::invalid_argument("mixing matrix size does not match agent count");
  check_shape(st.x, m, d, "x");
  check_shape(st.s, m, d, "s");
  check_shape(st.g_prev, m, d, "g_prev");
  st.work.resize(m, d);

  st.g_used = st.g_prev;
  st.work = st.x - eta * st.s;
  w.apply(st.work, st.x);

  sample_gradients(st.x, st.g_prev, ctx);
  w.apply(st.s, st.work);
  st.work += st.g_prev - st.g_used;
  st.s.swap(st.work);

  st.eta = eta;
  ++st.t;
}

}  // namespace gtsim
