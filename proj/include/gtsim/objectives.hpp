#pragma once

#include "gtsim/rng.hpp"
#include "gtsim/types.hpp"

#include <cstdint>
#include <vector>

namespace gtsim {

/// Parameters of a random heterogeneous quadratic suite. The suite is a pure
/// function of these fields, so configs store them instead of matrices.
struct QuadraticSpec {
  int agents = 1;
  int dim = 1;
  double mu = 1.0;
  double L = 1.0;
  double heterogeneity = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian gradient noise with per-coordinate variance sigma^2/d,
/// so E|noise|^2 = sigma^2.
struct NoiseModel {
  double sigma_bar = 0.0;
  int dim = 1;

  void add_to(Eigen::Ref<RowVector> g, Engine& rng) const;
};

/// m local objectives f_i(x) = x^T Q_i x / 2 + c_i^T x with mu I <= Q_i <= L I.
class QuadraticProblem {
 public:
  QuadraticProblem(std::vector<Matrix> hessians, Matrix linear, double mu, double L,
                   double sigma_bar);

  int agents() const { return static_cast<int>(hessians_.size()); }
  int dim() const { return static_cast<int>(linear_.cols()); }
  double mu() const { return mu_; }
  double L() const { return L_; }
  double sigma_bar() const { return noise_.sigma_bar; }
  const NoiseModel& noise() const { return noise_; }

  const Matrix& hessian(int i) const { return hessians_.at(static_cast<std::size_t>(i)); }
  /// Row i is c_i.
  const Matrix& linear() const { return linear_; }
  const Matrix& mean_hessian() const { return mean_hessian_; }
  const RowVector& mean_linear() const { return mean_linear_; }
  const RowVector& optimum() const { return optimum_; }

  Vector exact_gradient(int i, const Vector& x) const;
  Vector stochastic_gradient(int i, const Vector& x, Engine& rng) const;

  /// Row-wise kernels shared by every gradient entry point so that all paths
  /// are bit-identical.
  void gradient_row(int i, const Eigen::Ref<const RowVector>& x, Eigen::Ref<RowVector> out) const;
  void stochastic_gradient_row(int i, const Eigen::Ref<const RowVector>& x,
                               Eigen::Ref<RowVector> out, Engine& rng) const;

  /// Aggregate gradient: row i is grad f_i(x_i).
  Matrix exact_gradients(const Matrix& x) const;
  void exact_gradients(const Matrix& x, Matrix& out) const;

  double local_value(int i, const Eigen::Ref<const RowVector>& x) const;
  double global_value(const Eigen::Ref<const RowVector>& x) const;
  double global_suboptimality(const Eigen::Ref<const RowVector>& x) const;

 private:
  void check_agent(int i) const;

  std::vector<Matrix> hessians_;
  Matrix linear_;
  double mu_;
  double L_;
  NoiseModel noise_;
  Matrix mean_hessian_;
  RowVector mean_linear_;
  RowVector optimum_;
  double optimal_value_ = 0.0;
};

/// Random rotations of diagonal spectra in [mu, L] (endpoints always present
/// in the pooled spectrum), linear terms c_i = c_base + heterogeneity * z_i
/// with zero-mean z_i. Deterministic in spec.seed.
QuadraticProblem make_quadratic_suite(const QuadraticSpec& spec);

}  // namespace gtsim
