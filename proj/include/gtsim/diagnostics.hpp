#pragma once

#include "gtsim/algorithms.hpp"
#include "gtsim/objectives.hpp"
#include "gtsim/types.hpp"

namespace gtsim {

/// sum_i |row_i - mean row|^2.
double consensus_error(const Eigen::Ref<const Matrix>& x);

/// Block-diagonal projector on a stacked 2m x d matrix: each m-row block is
/// centered separately.
double augmented_consensus_error(const Eigen::Ref<const Matrix>& x_aug);

/// |grad F(q) - grad F(1 x*)|^2 with exact gradients.
double snapshot_gradient_distance(const QuadraticProblem& problem, const Eigen::Ref<const Matrix>& q);

/// |Pi x|^2 + (4 eta^2/theta^2) |Pi s|^2 + (2 eta/(L theta)) |grad F(q) - grad F(1x*)|^2.
double lyapunov_psi(double consensus_x, double consensus_s, double snap_grad_dist, double eta,
                    double theta, double L);
double lyapunov_psi(const SsState& state, double eta, double theta, const QuadraticProblem& problem);

/// Augmented analogue with consensus terms measured directly:
/// |Pi~ x~|^2 + (12 alpha eta^2/theta~^2) |Pi~ s~|^2
///   + (16 (1 + 8 alpha) eta^2/theta~^2) |grad F(q) - grad F(1x*)|^2.
double lyapunov_psi_tilde(double consensus_x, double consensus_s, double snap_grad_dist,
                          double eta, double theta_tilde, double alpha);
double lyapunov_psi_tilde(const AssState& state, double eta, double theta_tilde, double alpha,
                          const QuadraticProblem& problem);

/// Running sum_t w_t subopt_t / sum_t w_t with
/// w_t = (eta_t/eta_0) exp(mu/2 sum_{i<=t} eta_i), kept in log space relative
/// to the largest log-weight seen so far.
class WeightedAverager {
 public:
  explicit WeightedAverager(double mu) : mu_(mu) {}

  void push(double eta, double subopt);
  double average() const;
  double log_weight() const { return log_w_; }
  long count() const { return count_; }

 private:
  double mu_;
  double eta_prev_ = 0.0;
  double log_w_ = 0.0;
  double log_max_ = 0.0;
  double sum_w_ = 0.0;    // sum of exp(log w - log_max)
  double sum_wf_ = 0.0;   // same, times subopt
  long count_ = 0;
};

struct IterRecord {
  long t = 0;
  double eta = 0.0;
  int zeta = 0;
  double consensus_x = 0.0;
  double consensus_s = 0.0;
  double snap_grad_dist = 0.0;
  double psi = 0.0;
  double mean_dist = 0.0;
  double subopt = 0.0;
};

/// Relative residuals of the structural identities. Each is
/// |difference of means| / (RMS row norm of the operands), so it stays
/// meaningful when the means themselves vanish.
struct IdentityResiduals {
  double tracking = 0.0;  // mean(s) vs mean(snapshot or previous gradients)
  double block_x = 0.0;   // augmented only: top-block mean vs bottom-block mean
  double block_s = 0.0;
  double max() const;
};

IdentityResiduals audit_identities(const SsState& state);
IdentityResiduals audit_identities(const AssState& state);
IdentityResiduals audit_identities(const DsgtState& state);

/// Records use exact gradients for every Lyapunov term. For the baseline
/// method, which has no snapshot, q is taken to be the current x.
IterRecord record_iteration(const SsState& state, const QuadraticProblem& problem, double eta,
                            double theta);
IterRecord record_iteration(const AssState& state, const QuadraticProblem& problem, double eta,
                            double theta_tilde, double alpha);
IterRecord record_iteration(const DsgtState& state, const QuadraticProblem& problem, double eta,
                            double theta);

/// V = |xbar - x*|^2 + psi / (8m) for SS, psi / (16m) for ASS.
double lyapunov_total(const IterRecord& rec, Algorithm algo, int agents);

}  // namespace gtsim
