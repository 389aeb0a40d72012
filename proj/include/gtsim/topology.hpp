#pragma once

#include "gtsim/rng.hpp"
#include "gtsim/types.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gtsim {

enum class TopologyKind { ring, grid, star, complete };

std::string to_string(TopologyKind kind);
TopologyKind parse_topology(std::string_view name);

struct Edge {
  int i;
  int j;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on agents 0..m-1. Edges are stored with i < j and
/// sorted. Connectivity is not enforced here; consumers that need it check
/// connected().
class Graph {
 public:
  Graph(int agents, std::vector<Edge> edges);

  int agents() const { return agents_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<int> degrees() const;
  bool connected() const;

 private:
  int agents_;
  std::vector<Edge> edges_;
};

Graph build_graph(TopologyKind kind, int agents);

struct SpectralGap {
  double lambda2;
  double theta;
};

/// Second-largest singular value of a symmetric doubly stochastic matrix (the
/// operator norm of W - J/m) and theta = 1 - lambda2. A singleton network
/// returns (0, 1).
SpectralGap spectral_gap(const Matrix& w);

/// Symmetric doubly stochastic mixing operator with cached spectral data.
/// Immutable after construction.
class MixingMatrix {
 public:
  explicit MixingMatrix(Matrix entries);

  /// The single-edge averaging matrix I - (e_i - e_j)(e_i - e_j)^T / 2.
  static MixingMatrix pairwise_average(int agents, int i, int j);

  int agents() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double lambda2() const { return lambda2_; }
  double theta() const { return theta_; }
  bool psd() const { return psd_; }

  /// out = W * x. `out` must not alias `x`.
  void apply(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> out) const;
  Matrix apply(const Matrix& x) const;

 private:
  struct Precomputed {};
  MixingMatrix(Matrix entries, double lambda2, bool psd, Precomputed);
  void build_sparse();

  Matrix entries_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  bool use_sparse_ = false;
  double lambda2_ = 0.0;
  double theta_ = 1.0;
  bool psd_ = false;
};

MixingMatrix metropolis_mixing(const Graph& g);
MixingMatrix lazify(const MixingMatrix& w);

/// Draws one edge uniformly and returns its pairwise-averaging matrix.
MixingMatrix random_edge_gossip(const Graph& g, Engine& rng);

/// theta_eff = 1 - sqrt(lambda2(E[W^T W])) for uniform single-edge gossip,
/// computed by averaging over every edge.
SpectralGap expected_gossip_gap(const Graph& g);

/// Heavy-ball momentum (1 - sqrt(1 - lambda2)) / (1 + sqrt(1 - lambda2)).
double default_gamma(double lambda2);

/// The 2m x 2m operator [(1+g)W, -gW; I, 0] applied blockwise to stacked
/// [top; bottom] matrices. Copies share an id so a run can detect a swapped
/// operator.
class AugmentedMixing {
 public:
  AugmentedMixing(MixingMatrix base, double gamma);

  const MixingMatrix& base() const { return base_; }
  double gamma() const { return gamma_; }
  int agents() const { return base_.agents(); }
  std::uint64_t id() const { return id_; }

  /// out = W~ * x for x of shape 2m x d. `out` must not alias `x` and must
  /// already have the shape of `x`.
  void apply(const Matrix& x, Matrix& out) const;
  Matrix apply(const Matrix& x) const;

 private:
  MixingMatrix base_;
  double gamma_;
  std::uint64_t id_;
};

AugmentedMixing chebyshev_augment(const MixingMatrix& w, double gamma);

Matrix apply_mixing(const MixingMatrix& w, const Matrix& x);
Matrix apply_mixing(const AugmentedMixing& w, const Matrix& x);

struct ContractionFit {
  double theta_tilde;              // 1 - exp(slope) of the log-ratio regression
  std::vector<double> max_ratio;   // max over samples of |P~ W~^t P~ [x;x]| / |P x|, t = 0..horizon

  /// ratio_t <= sqrt(alpha) (1 - theta_tilde)^t for every recorded t.
  bool envelope_holds(double alpha) const;
};

/// Measures the decay of consensus disagreement under repeated application
/// of the augmented operator and fits an exponential rate by least squares on
/// log ratios over t = 0..horizon.
ContractionFit fit_chebyshev_contraction(const AugmentedMixing& w, int horizon = 200,
                                         int samples = 20, int columns = 3,
                                         std::uint64_t seed = 0);

}  // namespace gtsim
