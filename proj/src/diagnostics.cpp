#include "gtsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gtsim {

double consensus_error(const Eigen::Ref<const Matrix>& x) {
  if (x.rows() == 0) return 0.0;
  const RowVector mean = x.colwise().mean();
  return (x.rowwise() - mean).squaredNorm();
}

double augmented_consensus_error(const Eigen::Ref<const Matrix>& x_aug) {
  if (x_aug.rows() % 2 != 0) throw std::invalid_argument("augmented matrix needs an even row count");
  const Eigen::Index m = x_aug.rows() / 2;
  return consensus_error(x_aug.topRows(m)) + consensus_error(x_aug.bottomRows(m));
}

double snapshot_gradient_distance(const QuadraticProblem& problem, const Eigen::Ref<const Matrix>& q) {
  const int m = problem.agents();
  if (q.rows() != m || q.cols() != problem.dim()) throw std::invalid_argument("snapshot shape mismatch");
  RowVector gq(problem.dim());
  RowVector gs(problem.dim());
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    problem.gradient_row(i, q.row(i), gq);
    problem.gradient_row(i, problem.optimum(), gs);
    total += (gq - gs).squaredNorm();
  }
  return total;
}

double lyapunov_psi(double consensus_x, double consensus_s, double snap_grad_dist, double eta,
                    double theta, double L) {
  const double c1 = 4.0 * eta * eta / (theta * theta);
  const double c2 = 2.0 * eta / (L * theta);
  return consensus_x + c1 * consensus_s + c2 * snap_grad_dist;
}

double lyapunov_psi(const SsState& st, double eta, double theta, const QuadraticProblem& problem) {
  return lyapunov_psi(consensus_error(st.x), consensus_error(st.s),
                      snapshot_gradient_distance(problem, st.q), eta, theta, problem.L());
}

double lyapunov_psi_tilde(double consensus_x, double consensus_s, double snap_grad_dist,
                          double eta, double theta_tilde, double alpha) {
  const double r = eta * eta / (theta_tilde * theta_tilde);
  return consensus_x + 12.0 * alpha * r * consensus_s + 16.0 * (1.0 + 8.0 * alpha) * r * snap_grad_dist;
}

double lyapunov_psi_tilde(const AssState& st, double eta, double theta_tilde, double alpha,
                          const QuadraticProblem& problem) {
  return lyapunov_psi_tilde(augmented_consensus_error(st.x_aug), augmented_consensus_error(st.s_aug),
                            snapshot_gradient_distance(problem, st.q), eta, theta_tilde, alpha);
}

void WeightedAverager::push(double eta, double subopt) {
  if (!(eta > 0.0)) throw std::invalid_argument("weighted average needs positive step sizes");
  if (count_ == 0) {
    // w_0 = exp(mu eta_0 / 2).
    log_w_ = 0.5 * mu_ * eta;
    log_max_ = log_w_;
    sum_w_ = 1.0;
    sum_wf_ = subopt;
  } else {
    log_w_ += std::log(eta / eta_prev_) + 0.5 * mu_ * eta;
    if (log_w_ > log_max_) {
      const double shrink = std::exp(log_max_ - log_w_);
      sum_w_ *= shrink;
      sum_wf_ *= shrink;
      log_max_ = log_w_;
    }
    const double w = std::exp(log_w_ - log_max_);
    sum_w_ += w;
    sum_wf_ += w * subopt;
  }
  eta_prev_ = eta;
  ++count_;
}

double WeightedAverager::average() const {
  if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum_wf_ / sum_w_;
}

double IdentityResiduals::max() const { return std::max({tracking, block_x, block_s}); }

namespace {

double rms_rows(const Eigen::Ref<const Matrix>& a) {
  return a.rows() == 0 ? 0.0 : std::sqrt(a.squaredNorm() / static_cast<double>(a.rows()));
}

double relative_mean_gap(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  const double gap = (a.colwise().mean() - b.colwise().mean()).norm();
  const double scale = std::max(rms_rows(a), rms_rows(b));
  if (scale == 0.0) return gap;
  return gap / scale;
}

double block_gap(const Matrix& aug) {
  const Eigen::Index m = aug.rows() / 2;
  return relative_mean_gap(aug.topRows(m), aug.bottomRows(m));
}

double mean_dist(const QuadraticProblem& problem, const RowVector& xbar) {
  return (xbar - problem.optimum()).squaredNorm();
}

}  // namespace

IdentityResiduals audit_identities(const SsState& st) {
  return {relative_mean_gap(st.s, st.g_snap), 0.0, 0.0};
}

IdentityResiduals audit_identities(const AssState& st) {
  IdentityResiduals r;
  r.tracking = relative_mean_gap(st.s_aug, st.g_snap);
  r.block_x = block_gap(st.x_aug);
  r.block_s = block_gap(st.s_aug);
  return r;
}

IdentityResiduals audit_identities(const DsgtState& st) {
  return {relative_mean_gap(st.s, st.g_prev), 0.0, 0.0};
}

IterRecord record_iteration(const SsState& st, const QuadraticProblem& problem, double eta,
                            double theta) {
  IterRecord r;
  r.t = st.t;
  r.eta = eta;
  r.zeta = (st.t > 0 && st.zeta) ? 1 : 0;
  r.consensus_x = consensus_error(st.x);
  r.consensus_s = consensus_error(st.s);
  r.snap_grad_dist = snapshot_gradient_distance(problem, st.q);
  r.psi = lyapunov_psi(r.consensus_x, r.consensus_s, r.snap_grad_dist, eta, theta, problem.L());
  const RowVector xbar = st.x.colwise().mean();
  r.mean_dist = mean_dist(problem, xbar);
  r.subopt = problem.global_suboptimality(xbar);
  return r;
}

IterRecord record_iteration(const AssState& st, const QuadraticProblem& problem, double eta,
                            double theta_tilde, double alpha) {
  IterRecord r;
  r.t = st.t;
  r.eta = eta;
  r.zeta = (st.t > 0 && st.zeta) ? 1 : 0;
  r.consensus_x = augmented_consensus_error(st.x_aug);
  r.consensus_s = augmented_consensus_error(st.s_aug);
  r.snap_grad_dist = snapshot_gradient_distance(problem, st.q);
  r.psi = lyapunov_psi_tilde(r.consensus_x, r.consensus_s, r.snap_grad_dist, eta, theta_tilde, alpha);
  const RowVector xbar = st.x().colwise().mean();
  r.mean_dist = mean_dist(problem, xbar);
  r.subopt = problem.global_suboptimality(xbar);
  return r;
}

IterRecord record_iteration(const DsgtState& st, const QuadraticProblem& problem, double eta,
                            double theta) {
  IterRecord r;
  r.t = st.t;
  r.eta = eta;
  r.zeta = 0;
  r.consensus_x = consensus_error(st.x);
  r.consensus_s = consensus_error(st.s);
  r.snap_grad_dist = snapshot_gradient_distance(problem, st.x);
  r.psi = lyapunov_psi(r.consensus_x, r.consensus_s, r.snap_grad_dist, eta, theta, problem.L());
  const RowVector xbar = st.x.colwise().mean();
  r.mean_dist = mean_dist(problem, xbar);
  r.subopt = problem.global_suboptimality(xbar);
  return r;
}

double lyapunov_total(const IterRecord& rec, Algorithm algo, int agents) {
  const double denom = (algo == Algorithm::assdsgt ? 16.0 : 8.0) * agents;
  return rec.mean_dist + rec.psi / denom;
}

}  // namespace gtsim
