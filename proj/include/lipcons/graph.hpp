#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcons/numkit.hpp"

namespace lipcons {

/// Unit-weight directed graph. Nodes are 0-based internally; file formats
/// and reports use 1-based indices. An edge (parent, child) means the child
/// hears the parent: a[child][parent] = 1.
class DiGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  DiGraph() = default;
  /// Rejects self-loops and out-of-range endpoints; duplicate edges collapse.
  DiGraph(std::size_t n, std::vector<Edge> edges);
  static DiGraph from_adjacency(const Mat& adjacency);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  Mat adjacency() const;
  std::vector<std::size_t> in_degree() const;
  std::vector<std::size_t> out_degree() const;
  std::vector<std::vector<std::size_t>> children() const;

  /// Subgraph on `keep` (re-indexed in the given order).
  DiGraph induced(const std::vector<std::size_t>& keep) const;

  friend bool operator==(const DiGraph&, const DiGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;  // sorted, unique
};

Mat laplacian(const DiGraph& g);

struct GraphFlags {
  bool strongly_connected = false;
  bool balanced = false;
  bool has_spanning_tree = false;
  std::optional<std::size_t> leader_follower_root;  // 0-based
  std::size_t scc_count = 0;
};

GraphFlags classify(const DiGraph& g);

/// Tarjan SCC labels, one per node.
std::vector<std::size_t> strongly_connected_components(const DiGraph& g);

/// Positive left null vector of a strongly connected Laplacian, normalized to sum 1.
Vec left_perron(const Mat& lap, const Tolerances& tol = default_tolerances());

/// min over rᵀx = 0 of xᵀ(RL + LᵀR)x / (2 xᵀRx), via a deflated symmetric eigenproblem.
double generalized_connectivity(const Mat& lap, const Vec& r);

/// Smallest nonzero eigenvalue of (L+Lᵀ)/2 (second smallest when zero is simple).
double lambda2_symmetric(const Mat& lap);

struct GraphSpectra {
  Mat laplacian;
  GraphFlags flags;
  std::optional<Vec> r;               // strongly connected only
  std::optional<Mat> big_r;
  std::optional<double> a_of_l;
  std::optional<double> lambda2_sym;  // balanced and strongly connected only
  std::size_t laplacian_rank = 0;
};

GraphSpectra analyze(const DiGraph& g, const Tolerances& tol = default_tolerances());

struct LeaderFollowerData {
  std::size_t leader = 0;               // 0-based
  std::vector<std::size_t> followers;   // 0-based, ascending
  Mat l1;
  Mat l2;
  Vec q;
  Mat big_g;
  Mat h;
  double lambda1_h = 0.0;
  double min_q = 0.0;
  // Set when the follower subgraph is balanced and strongly connected:
  // smallest eigenvalue of (L1 + L1ᵀ)/2.
  std::optional<double> lambda1_sym_l1;
};

LeaderFollowerData leader_follower_data(const DiGraph& g, std::size_t leader,
                                        const Tolerances& tol = default_tolerances());

/// Edge-list text format: a `nodes N` header, then one `parent child` pair
/// per line (1-based). Blank lines and text after '#' are ignored.
DiGraph parse_edge_list(const std::string& text);
std::string format_edge_list(const DiGraph& g);
DiGraph load_edge_list(const std::string& path);

/// Six-node balanced, strongly connected graph of the manipulator example.
DiGraph manipulator_graph();

}  // namespace lipcons
