#include "gtsim/objectives.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <random>

namespace gtsim {

namespace {

constexpr double kSpectrumTol = 1e-9;

Matrix haar_rotation(int d, Engine& rng, std::normal_distribution<double>& normal) {
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

void NoiseModel::add_to(Eigen::Ref<RowVector> g, Engine& rng) const {
  if (sigma_bar == 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma_bar / std::sqrt(static_cast<double>(dim)));
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += normal(rng);
}

QuadraticProblem::QuadraticProblem(std::vector<Matrix> hessians, Matrix linear, double mu,
                                   double L, double sigma_bar)
    : hessians_(std::move(hessians)), linear_(std::move(linear)), mu_(mu), L_(L) {
  if (!(mu > 0.0) || !(L >= mu)) throw std::invalid_argument("need 0 < mu <= L");
  if (!(sigma_bar >= 0.0)) throw std::invalid_argument("noise scale must be non-negative");
  const auto m = static_cast<Eigen::Index>(hessians_.size());
  if (m == 0 || linear_.rows() != m || linear_.cols() == 0) {
    throw std::invalid_argument("need one hessian and one linear term per agent");
  }
  const Eigen::Index d = linear_.cols();
  noise_ = NoiseModel{sigma_bar, static_cast<int>(d)};

  mean_hessian_ = Matrix::Zero(d, d);
  for (auto& q : hessians_) {
    if (q.rows() != d || q.cols() != d) throw std::invalid_argument("hessian shape mismatch");
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, L)) {
      throw std::invalid_argument("hessian is not symmetric");
    }
    q = (0.5 * (q + q.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(q), Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    if (ev(0) < mu - kSpectrumTol || ev(d - 1) > L + kSpectrumTol) {
      throw std::invalid_argument("hessian spectrum outside [mu, L]");
    }
    mean_hessian_ += q;
  }
  mean_hessian_ /= static_cast<double>(m);
  mean_linear_ = linear_.colwise().mean();

  const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(mean_hessian_)};
  const Eigen::VectorXd xstar = llt.solve(-mean_linear_.transpose());
  optimum_ = xstar.transpose();
  optimal_value_ = global_value(optimum_);
}

void QuadraticProblem::check_agent(int i) const {
  if (i < 0 || i >= agents()) {
    throw std::invalid_argument("agent index " + std::to_string(i) + " out of range [0, " +
                                std::to_string(agents()) + ")");
  }
}

void QuadraticProblem::gradient_row(int i, const Eigen::Ref<const RowVector>& x,
                                    Eigen::Ref<RowVector> out) const {
  check_agent(i);
  if (x.size() != dim() || out.size() != dim()) throw std::invalid_argument("gradient dimension mismatch");
  out.noalias() = x * hessians_[static_cast<std::size_t>(i)];
  out += linear_.row(i);
}

void QuadraticProblem::stochastic_gradient_row(int i, const Eigen::Ref<const RowVector>& x,
                                               Eigen::Ref<RowVector> out, Engine& rng) const {
  gradient_row(i, x, out);
  noise_.add_to(out, rng);
}

Vector QuadraticProblem::exact_gradient(int i, const Vector& x) const {
  RowVector out(dim());
  gradient_row(i, x.transpose(), out);
  return out.transpose();
}

Vector QuadraticProblem::stochastic_gradient(int i, const Vector& x, Engine& rng) const {
  RowVector out(dim());
  stochastic_gradient_row(i, x.transpose(), out, rng);
  return out.transpose();
}

Matrix QuadraticProblem::exact_gradients(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  exact_gradients(x, out);
  return out;
}

void QuadraticProblem::exact_gradients(const Matrix& x, Matrix& out) const {
  if (x.rows() != agents() || x.cols() != dim()) throw std::invalid_argument("iterate shape mismatch");
  out.resize(x.rows(), x.cols());
  for (int i = 0; i < agents(); ++i) gradient_row(i, x.row(i), out.row(i));
}

double QuadraticProblem::local_value(int i, const Eigen::Ref<const RowVector>& x) const {
  check_agent(i);
  return 0.5 * x.dot(x * hessians_[static_cast<std::size_t>(i)]) + linear_.row(i).dot(x);
}

double QuadraticProblem::global_value(const Eigen::Ref<const RowVector>& x) const {
  double sum = 0.0;
  for (int i = 0; i < agents(); ++i) sum += local_value(i, x);
  return sum / agents();
}

double QuadraticProblem::global_suboptimality(const Eigen::Ref<const RowVector>& x) const {
  // Exact for quadratics and free of the cancellation in f(x) - f(x*).
  const RowVector diff = x - optimum_;
  return 0.5 * diff.dot(diff * mean_hessian_);
}

QuadraticProblem make_quadratic_suite(const QuadraticSpec& spec) {
  if (spec.agents < 1 || spec.dim < 1) throw std::invalid_argument("agents and dim must be positive");
  if (!(spec.mu > 0.0) || !(spec.mu <= spec.L)) throw std::invalid_argument("need 0 < mu <= L");

  Engine rng = make_stream(spec.seed, StreamPurpose::problem);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(spec.mu, spec.L);
  const int m = spec.agents;
  const int d = spec.dim;

  std::vector<Matrix> hessians;
  hessians.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd spectrum(d);
    for (int k = 0; k < d; ++k) spectrum(k) = uniform(rng);
    // Pin the declared constants into the pooled spectrum.
    if (i == m - 1) spectrum(d - 1) = spec.L;
    if (i == 0) spectrum(0) = spec.mu;
    const Matrix u = haar_rotation(d, rng, normal);
    Matrix q = u * spectrum.asDiagonal() * u.transpose();
    hessians.push_back((0.5 * (q + q.transpose())).eval());
  }

  RowVector base(d);
  for (int k = 0; k < d; ++k) base(k) = normal(rng);
  Matrix z(m, d);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < d; ++k) z(i, k) = normal(rng);
  }
  z.rowwise() -= z.colwise().mean();
  Matrix linear = z * spec.heterogeneity;
  linear.rowwise() += base;

  return QuadraticProblem(std::move(hessians), std::move(linear), spec.mu, spec.L, spec.sigma);
}

}  // namespace gtsim
