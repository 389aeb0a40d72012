#include "gtsim/topology.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <queue>

namespace gtsim {

namespace {

constexpr double kStochasticTol = 1e-10;
constexpr double kSymmetryTol = 1e-12;
constexpr double kGapInputTol = 1e-8;
constexpr double kPsdTol = 1e-10;

double max_row_sum_error(const Matrix& w) {
  double err = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    err = std::max(err, std::abs(w.row(i).sum() - 1.0));
  }
  return err;
}

struct Spectrum {
  double lambda2;
  double min_eigenvalue;
};

// Eigenvalues of W with the unit eigenvalue belonging to 1 removed; lambda2 is
// the largest magnitude among the rest.
Spectrum symmetric_spectrum(const Matrix& w) {
  const Eigen::Index m = w.rows();
  if (m == 1) return {0.0, w(0, 0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(w), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of mixing matrix failed");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  Eigen::Index unit = 0;
  for (Eigen::Index k = 1; k < m; ++k) {
    if (std::abs(ev(k) - 1.0) < std::abs(ev(unit) - 1.0)) unit = k;
  }
  double lambda2 = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k != unit) lambda2 = std::max(lambda2, std::abs(ev(k)));
  }
  return {std::min(lambda2, 1.0), ev(0)};
}

std::uint64_t next_operator_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::grid: return "grid";
    case TopologyKind::star: return "star";
    case TopologyKind::complete: return "complete";
  }
  return "unknown";
}

TopologyKind parse_topology(std::string_view name) {
  if (name == "ring") return TopologyKind::ring;
  if (name == "grid") return TopologyKind::grid;
  if (name == "star") return TopologyKind::star;
  if (name == "complete") return TopologyKind::complete;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

Graph::Graph(int agents, std::vector<Edge> edges) : agents_(agents) {
  if (agents < 1) throw std::invalid_argument("graph needs at least one agent");
  for (auto& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("self-loop on agent " + std::to_string(e.i));
    if (e.i < 0 || e.j < 0 || e.i >= agents || e.j >= agents) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge");
  }
  edges_ = std::move(edges);
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(agents_), 0);
  for (const auto& e : edges_) {
    ++deg[static_cast<std::size_t>(e.i)];
    ++deg[static_cast<std::size_t>(e.j)];
  }
  return deg;
}

bool Graph::connected() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(agents_));
  for (const auto& e : edges_) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<bool> seen(static_cast<std::size_t>(agents_), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        ++reached;
        frontier.push(u);
      }
    }
  }
  return reached == agents_;
}

Graph build_graph(TopologyKind kind, int agents) {
  if (agents < 1) throw std::invalid_argument("agent count must be positive");
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::ring:
      if (agents == 2) {
        edges.push_back({0, 1});
      } else if (agents > 2) {
        for (int i = 0; i < agents; ++i) edges.push_back({i, (i + 1) % agents});
      }
      break;
    case TopologyKind::grid: {
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(agents))));
      if (side * side != agents) {
        throw std::invalid_argument("grid topology needs a perfect-square agent count, got " +
                                    std::to_string(agents));
      }
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const int v = r * side + c;
          if (c + 1 < side) edges.push_back({v, v + 1});
          if (r + 1 < side) edges.push_back({v, v + side});
        }
      }
      break;
    }
    case TopologyKind::star:
      for (int i = 1; i < agents; ++i) edges.push_back({0, i});
      break;
    case TopologyKind::complete:
      for (int i = 0; i < agents; ++i) {
        for (int j = i + 1; j < agents; ++j) edges.push_back({i, j});
      }
      break;
  }
  return Graph(agents, std::move(edges));
}

SpectralGap spectral_gap(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw std::invalid_argument("mixing matrix must be square and non-empty");
  }
  if (max_row_sum_error(w) > kGapInputTol || max_row_sum_error(w.transpose()) > kGapInputTol) {
    throw std::invalid_argument("matrix is not doubly stochastic");
  }
  const double lambda2 = symmetric_spectrum(w).lambda2;
  return {lambda2, 1.0 - lambda2};
}

MixingMatrix::MixingMatrix(Matrix entries) : entries_(std::move(entries)) {
  const Eigen::Index m = entries_.rows();
  if (m == 0 || entries_.cols() != m) {
    throw std::invalid_argument("mixing matrix must be square and non-empty");
  }
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument("mixing matrix is not symmetric");
  }
  if (entries_.minCoeff() < 0.0 || entries_.maxCoeff() > 1.0) {
    throw std::invalid_argument("mixing matrix entries must lie in [0, 1]");
  }
  if (max_row_sum_error(entries_) > kStochasticTol) {
    throw std::invalid_argument("mixing matrix rows must sum to 1");
  }
  // Exact symmetry after the tolerance check.
  entries_ = (0.5 * (entries_ + entries_.transpose())).eval();
  const Spectrum spec = symmetric_spectrum(entries_);
  lambda2_ = spec.lambda2;
  theta_ = 1.0 - spec.lambda2;
  psd_ = spec.min_eigenvalue >= -kPsdTol;
  build_sparse();
}

MixingMatrix::MixingMatrix(Matrix entries, double lambda2, bool psd, Precomputed)
    : entries_(std::move(entries)), lambda2_(lambda2), theta_(1.0 - lambda2), psd_(psd) {
  build_sparse();
}

void MixingMatrix::build_sparse() {
  const Eigen::Index m = entries_.rows();
  const auto nnz = (entries_.array() != 0.0).count();
  use_sparse_ = m >= 8 && static_cast<double>(nnz) < 0.25 * static_cast<double>(m * m);
  if (use_sparse_) sparse_ = entries_.sparseView();
}

MixingMatrix MixingMatrix::pairwise_average(int agents, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= agents || j >= agents) {
    throw std::invalid_argument("pairwise average needs two distinct agents");
  }
  Matrix w = Matrix::Identity(agents, agents);
  w(i, i) = 0.5;
  w(j, j) = 0.5;
  w(i, j) = 0.5;
  w(j, i) = 0.5;
  // Eigenvalues: 0 once, 1 with multiplicity m-1.
  const double lambda2 = agents > 2 ? 1.0 : 0.0;
  return MixingMatrix(std::move(w), lambda2, true, Precomputed{});
}

void MixingMatrix::apply(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const {
  if (x.rows() != entries_.rows() || out.rows() != x.rows() || out.cols() != x.cols()) {
    throw std::invalid_argument("mixing shape mismatch: matrix is " +
                                std::to_string(entries_.rows()) + " agents, input has " +
                                std::to_string(x.rows()) + " rows");
  }
  if (use_sparse_) {
    out.noalias() = sparse_ * x;
  } else {
    out.noalias() = entries_ * x;
  }
}

Matrix MixingMatrix::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  apply(x, out);
  return out;
}

MixingMatrix metropolis_mixing(const Graph& g) {
  if (!g.connected()) throw std::invalid_argument("metropolis mixing needs a connected graph");
  const int m = g.agents();
  const auto deg = g.degrees();
  Matrix w = Matrix::Zero(m, m);
  for (const auto& e : g.edges()) {
    const double weight =
        1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(e.i)], deg[static_cast<std::size_t>(e.j)]));
    w(e.i, e.j) = weight;
    w(e.j, e.i) = weight;
  }
  for (int i = 0; i < m; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return MixingMatrix(std::move(w));
}

MixingMatrix lazify(const MixingMatrix& w) {
  const Eigen::Index m = w.agents();
  Matrix lazy = 0.5 * (Matrix::Identity(m, m) + w.entries());
  return MixingMatrix(std::move(lazy));
}

MixingMatrix random_edge_gossip(const Graph& g, Engine& rng) {
  if (g.edges().empty()) return MixingMatrix(Matrix::Identity(g.agents(), g.agents()));
  std::uniform_int_distribution<std::size_t> pick(0, g.edges().size() - 1);
  const Edge e = g.edges()[pick(rng)];
  return MixingMatrix::pairwise_average(g.agents(), e.i, e.j);
}

SpectralGap expected_gossip_gap(const Graph& g) {
  const int m = g.agents();
  if (g.edges().empty()) return {0.0, 1.0};
  Matrix mean = Matrix::Zero(m, m);
  for (const auto& e : g.edges()) {
    const Matrix w = MixingMatrix::pairwise_average(m, e.i, e.j).entries();
    mean.noalias() += w.transpose() * w;
  }
  mean /= static_cast<double>(g.edges().size());
  const double lambda2 = symmetric_spectrum(mean).lambda2;
  return {lambda2, 1.0 - std::sqrt(lambda2)};
}

double default_gamma(double lambda2) {
  if (!(lambda2 >= 0.0) || lambda2 >= 1.0) {
    throw std::invalid_argument("default_gamma needs 0 <= lambda2 < 1 (connected network)");
  }
  const double r = std::sqrt(1.0 - lambda2);
  return (1.0 - r) / (1.0 + r);
}

AugmentedMixing::AugmentedMixing(MixingMatrix base, double gamma)
    : base_(std::move(base)), gamma_(gamma), id_(next_operator_id()) {
  if (!base_.psd()) {
    throw std::invalid_argument("augmented mixing needs a positive semi-definite base matrix");
  }
  if (!(gamma >= 0.0) || gamma >= 1.0) {
    throw std::invalid_argument("momentum gamma must lie in [0, 1)");
  }
}

void AugmentedMixing::apply(const Matrix& x, Matrix& out) const {
  const Eigen::Index m = base_.agents();
  if (x.rows() != 2 * m || out.rows() != x.rows() || out.cols() != x.cols()) {
    throw std::invalid_argument("augmented mixing shape mismatch: expected " +
                                std::to_string(2 * m) + " rows, got " + std::to_string(x.rows()));
  }
  base_.apply(x.topRows(m), out.topRows(m));
  base_.apply(x.bottomRows(m), out.bottomRows(m));
  out.topRows(m) = (1.0 + gamma_) * out.topRows(m) - gamma_ * out.bottomRows(m);
  out.bottomRows(m) = x.topRows(m);
}

Matrix AugmentedMixing::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  apply(x, out);
  return out;
}

AugmentedMixing chebyshev_augment(const MixingMatrix& w, double gamma) {
  return AugmentedMixing(w, gamma);
}

Matrix apply_mixing(const MixingMatrix& w, const Matrix& x) { return w.apply(x); }

Matrix apply_mixing(const AugmentedMixing& w, const Matrix& x) { return w.apply(x); }

bool ContractionFit::envelope_holds(double alpha) const {
  const double scale = std::sqrt(alpha);
  for (std::size_t t = 0; t < max_ratio.size(); ++t) {
    const double bound = scale * std::pow(1.0 - theta_tilde, static_cast<double>(t));
    if (max_ratio[t] > bound * (1.0 + 1e-12)) return false;
  }
  return true;
}

namespace {

Matrix project_blocks(const Matrix& x, Eigen::Index m) {
  Matrix out = x;
  out.topRows(m).rowwise() -= x.topRows(m).colwise().mean();
  out.bottomRows(m).rowwise() -= x.bottomRows(m).colwise().mean();
  return out;
}

}  // namespace

ContractionFit fit_chebyshev_contraction(const AugmentedMixing& w, int horizon, int samples,
                                         int columns, std::uint64_t seed) {
  if (horizon < 1 || samples < 1 || columns < 1) {
    throw std::invalid_argument("contraction fit needs positive horizon, samples and columns");
  }
  const Eigen::Index m = w.agents();
  ContractionFit fit{1.0, std::vector<double>(static_cast<std::size_t>(horizon) + 1, 0.0)};
  if (m == 1) return fit;

  Engine rng = make_stream(seed, StreamPurpose::contraction_fit);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix state(2 * m, columns);
  Matrix next(2 * m, columns);
  for (int k = 0; k < samples; ++k) {
    Matrix x(m, columns);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < columns; ++j) x(i, j) = normal(rng);
    }
    x.rowwise() -= x.colwise().mean();
    const double base_norm = x.norm();
    if (base_norm == 0.0) continue;
    state.topRows(m) = x;
    state.bottomRows(m) = x;
    fit.max_ratio[0] = std::max(fit.max_ratio[0], project_blocks(state, m).norm() / base_norm);
    for (int t = 1; t <= horizon; ++t) {
      w.apply(state, next);
      std::swap(state, next);
      const double ratio = project_blocks(state, m).norm() / base_norm;
      auto& slot = fit.max_ratio[static_cast<std::size_t>(t)];
      slot = std::max(slot, ratio);
    }
  }

  // Least-squares slope of log ratio against t over the numerically
  // meaningful part of the curve.
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  int n = 0;
  for (std::size_t t = 0; t < fit.max_ratio.size(); ++t) {
    const double r = fit.max_ratio[t];
    if (!(r > 1e-280)) continue;
    const double y = std::log(r);
    const double tt = static_cast<double>(t);
    sum_t += tt;
    sum_y += y;
    sum_tt += tt * tt;
    sum_ty += tt * y;
    ++n;
  }
  if (n >= 2) {
    const double denom = n * sum_tt - sum_t * sum_t;
    const double slope = (n * sum_ty - sum_t * sum_y) / denom;
    fit.theta_tilde = std::clamp(1.0 - std::exp(slope), 1e-12, 1.0);
  }
  return fit;
}

}  // namespace gtsim
