#include "lipcons/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "lipcons/error.hpp"

namespace lipcons {

DiGraph::DiGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  for (const auto& [p, c] : edges_) {
    if (p >= n_ || c >= n_) {
      std::ostringstream os;
      os << "edge (" << p + 1 << ", " << c + 1 << ") has an endpoint outside 1.." << n_;
      fail(ErrorCode::kInvalidArgument, os.str());
    }
    if (p == c) {
      std::ostringstream os;
      os << "self-loop at node " << p + 1 << " is not allowed";
      fail(ErrorCode::kInvalidArgument, os.str());
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

DiGraph DiGraph::from_adjacency(const Mat& adj) {
  if (!adj.is_square()) fail(ErrorCode::kInvalidArgument, "adjacency matrix must be square");
  std::vector<Edge> e;
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t j = 0; j < adj.cols(); ++j) {
      const double v = adj(i, j);
      if (v == 0.0) continue;
      if (v != 1.0) fail(ErrorCode::kInvalidArgument, "adjacency entries must be 0 or 1");
      if (i == j) fail(ErrorCode::kInvalidArgument, "adjacency diagonal must be zero");
      e.emplace_back(j, i);
    }
  return DiGraph(adj.rows(), std::move(e));
}

Mat DiGraph::adjacency() const {
  Mat a(n_, n_);
  for (const auto& [p, c] : edges_) a(c, p) = 1.0;
  return a;
}

std::vector<std::size_t> DiGraph::in_degree() const {
  std::vector<std::size_t> d(n_, 0);
  for (const auto& e : edges_) ++d[e.second];
  return d;
}

std::vector<std::size_t> DiGraph::out_degree() const {
  std::vector<std::size_t> d(n_, 0);
  for (const auto& e : edges_) ++d[e.first];
  return d;
}

std::vector<std::vector<std::size_t>> DiGraph::children() const {
  std::vector<std::vector<std::size_t>> ch(n_);
  for (const auto& [p, c] : edges_) ch[p].push_back(c);
  return ch;
}

DiGraph DiGraph::induced(const std::vector<std::size_t>& keep) const {
  std::vector<std::size_t> index(n_, n_);
  for (std::size_t k = 0; k < keep.size(); ++k) index.at(keep[k]) = k;
  std::vector<Edge> e;
  for (const auto& [p, c] : edges_)
    if (index[p] != n_ && index[c] != n_) e.emplace_back(index[p], index[c]);
  return DiGraph(keep.size(), std::move(e));
}

Mat laplacian(const DiGraph& g) {
  const std::size_t n = g.size();
  Mat l(n, n);
  for (const auto& [p, c] : g.edges()) {
    l(c, p) -= 1.0;
    l(c, c) += 1.0;
  }
  return l;
}

std::vector<std::size_t> strongly_connected_components(const DiGraph& g) {
  const std::size_t n = g.size();
  const auto ch = g.children();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, ncomp = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : ch[v]) {
      if (index[w] == kUnset) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == kUnset) visit(v);
  return comp;
}

namespace {

std::vector<bool> reachable_from(const std::vector<std::vector<std::size_t>>& ch, std::size_t root) {
  std::vector<bool> seen(ch.size(), false);
  std::vector<std::size_t> todo{root};
  seen[root] = true;
  while (!todo.empty()) {
    const std::size_t v = todo.back();
    todo.pop_back();
    for (std::size_t w : ch[v])
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

DiGraph graph_of_laplacian(const Mat& lap) {
  if (!lap.is_square()) fail(ErrorCode::kInvalidArgument, "Laplacian must be square");
  std::vector<DiGraph::Edge> e;
  for (std::size_t i = 0; i < lap.rows(); ++i)
    for (std::size_t j = 0; j < lap.cols(); ++j)
      if (i != j && lap(i, j) != 0.0) e.emplace_back(j, i);
  return DiGraph(lap.rows(), std::move(e));
}

}  // namespace

GraphFlags classify(const DiGraph& g) {
  GraphFlags f;
  const std::size_t n = g.size();
  if (n == 0) return f;
  const auto comp = strongly_connected_components(g);
  f.scc_count = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  f.strongly_connected = f.scc_count == 1;
  f.balanced = g.in_degree() == g.out_degree();

  const auto ch = g.children();
  const auto indeg = g.in_degree();
  for (std::size_t v = 0; v < n; ++v) {
    if (!all_true(reachable_from(ch, v))) continue;
    f.has_spanning_tree = true;
    if (indeg[v] == 0) {
      f.leader_follower_root = v;
      break;
    }
  }
  return f;
}

Vec left_perron(const Mat& lap, const Tolerances& tol) {
  const DiGraph g = graph_of_laplacian(lap);
  const std::size_t n = g.size();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "left_perron: empty Laplacian");
  if (!classify(g).strongly_connected) {
    fail(ErrorCode::kPrecondition,
         "left_perron: graph is not strongly connected, the zero eigenvalue has no positive left eigenvector");
  }
  Vec r(n, 1.0);
  if (n > 1) {
    // Lᵀ r = 0 with r_n = 1: the leading (n-1) principal block of a strongly
    // connected Laplacian is nonsingular.
    const Mat lt = lap.transpose();
    const Mat block = lt.block(0, 0, n - 1, n - 1);
    Mat rhs(n - 1, 1);
    for (std::size_t i = 0; i + 1 < n; ++i) rhs(i, 0) = -lt(i, n - 1);
    const Mat head = solve_linear(block, rhs, tol);
    for (std::size_t i = 0; i + 1 < n; ++i) r[i] = head(i, 0);
  }
  double sum = 0.0;
  for (double v : r) sum += v;
  for (double& v : r) v /= sum;

  const Vec res = lap.transpose() * std::span<const double>(r);
  const double scale = std::max(1.0, lap.max_abs());
  if (norm2(res) > tol.perron_residual * scale ||
      std::any_of(r.begin(), r.end(), [](double v) { return !(v > 0.0); })) {
    fail(ErrorCode::kNumeric, "left_perron: null vector is not positive or residual too large");
  }
  return r;
}

double generalized_connectivity(const Mat& lap, const Vec& r) {
  const std::size_t n = lap.rows();
  if (!lap.is_square() || r.size() != n) fail(ErrorCode::kInvalidArgument, "generalized_connectivity: size mismatch");
  if (n < 2) fail(ErrorCode::kPrecondition, "generalized_connectivity needs at least two nodes");
  if (std::any_of(r.begin(), r.end(), [](double v) { return !(v > 0.0); })) {
    fail(ErrorCode::kPrecondition, "generalized_connectivity: r must be positive (strongly connected graph)");
  }
  const Mat big_r = Mat::diag(r);
  const Mat q = big_r * lap + lap.transpose() * big_r;

  // y = R^{1/2} x turns the constraint rᵀx = 0 into wᵀy = 0 with w ∝ sqrt(r).
  Vec inv_sqrt(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(r[i]);
    w[i] = std::sqrt(r[i]);
  }
  const double wn = norm2(w);
  for (double& v : w) v /= wn;

  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = inv_sqrt[i] * q(i, j) * inv_sqrt[j];
  Mat proj = Mat::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) proj(i, j) -= w[i] * w[j];
  const Mat deflated = symmetrize(proj * m * proj);
  // The projection adds an artificial zero along w; the next value is the
  // constrained minimum.
  return 0.5 * sym_eig(deflated).values[1];
}

double lambda2_symmetric(const Mat& lap) {
  if (lap.rows() < 2) fail(ErrorCode::kPrecondition, "lambda2 needs at least two nodes");
  const Mat s = 0.5 * (lap + lap.transpose());
  return sym_eig(s).values[1];
}

GraphSpectra analyze(const DiGraph& g, const Tolerances& tol) {
  GraphSpectra s;
  s.laplacian = laplacian(g);
  s.flags = classify(g);
  s.laplacian_rank = rank(s.laplacian, tol);
  if (s.flags.strongly_connected && g.size() >= 2) {
    s.r = left_perron(s.laplacian, tol);
    s.big_r = Mat::diag(*s.r);
    s.a_of_l = generalized_connectivity(s.laplacian, *s.r);
    if (s.flags.balanced) s.lambda2_sym = lambda2_symmetric(s.laplacian);
  }
  return s;
}

LeaderFollowerData leader_follower_data(const DiGraph& g, std::size_t leader, const Tolerances& tol) {
  const std::size_t n = g.size();
  if (leader >= n) fail(ErrorCode::kInvalidArgument, "leader index out of range");
  if (n < 2) fail(ErrorCode::kPrecondition, "leader-follower graph needs at least one follower");
  if (g.in_degree()[leader] != 0) {
    std::ostringstream os;
    os << "node " << leader + 1 << " has neighbors and cannot act as the leader";
    fail(ErrorCode::kPrecondition, os.str());
  }
  if (!all_true(reachable_from(g.children(), leader))) {
    fail(ErrorCode::kPrecondition,
         "Assumption 1 violated: no directed spanning tree rooted at the leader");
  }

  LeaderFollowerData d;
  d.leader = leader;
  for (std::size_t i = 0; i < n; ++i)
    if (i != leader) d.followers.push_back(i);
  const std::size_t m = d.followers.size();
  const Mat lap = laplacian(g);
  d.l1 = Mat(m, m);
  d.l2 = Mat(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    d.l2(i, 0) = lap(d.followers[i], leader);
    for (std::size_t j = 0; j < m; ++j) d.l1(i, j) = lap(d.followers[i], d.followers[j]);
  }

  const Mat q = solve_linear(d.l1, Mat(m, 1, 1.0), tol);
  d.q = q.col(0);
  if (std::any_of(d.q.begin(), d.q.end(), [](double v) { return !(v > 0.0); })) {
    fail(ErrorCode::kPrecondition, "Assumption 1 violated: q = L1^{-1} 1 is not positive");
  }
  Vec ginv(m);
  for (std::size_t i = 0; i < m; ++i) ginv[i] = 1.0 / d.q[i];
  d.big_g = Mat::diag(ginv);
  d.h = 0.5 * (d.big_g * d.l1 + d.l1.transpose() * d.big_g);
  d.lambda1_h = min_eig(d.h);
  d.min_q = *std::min_element(d.q.begin(), d.q.end());
  if (!(d.lambda1_h > 0.0)) fail(ErrorCode::kNumeric, "H is not positive definite");

  const GraphFlags ff = classify(g.induced(d.followers));
  if (m >= 1 && ff.strongly_connected && ff.balanced) {
    d.lambda1_sym_l1 = min_eig(0.5 * (d.l1 + d.l1.transpose()));
  }
  return d;
}

DiGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> nodes;
  std::vector<DiGraph::Edge> edges;
  auto bad = [&](const std::string& what) {
    std::ostringstream os;
    os << "edge list line " << lineno << ": " << what;
    fail(ErrorCode::kParse, os.str());
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "nodes") {
      long long v = 0;
      if (nodes) bad("duplicate 'nodes' header");
      if (!(ls >> v) || v <= 0) bad("expected 'nodes N' with N >= 1");
      nodes = static_cast<std::size_t>(v);
    } else {
      if (!nodes) bad("missing 'nodes N' header before the first edge");
      long long p = 0, c = 0;
      std::istringstream ps(first);
      if (!(ps >> p) || !ps.eof() || !(ls >> c)) bad("expected 'parent child'");
      if (p < 1 || c < 1 || static_cast<std::size_t>(p) > *nodes || static_cast<std::size_t>(c) > *nodes) {
        bad("node index out of range 1.." + std::to_string(*nodes));
      }
      if (p == c) bad("self-loop");
      edges.emplace_back(static_cast<std::size_t>(p - 1), static_cast<std::size_t>(c - 1));
    }
    std::string extra;
    if (ls >> extra) bad("unexpected trailing token '" + extra + "'");
  }
  if (!nodes) fail(ErrorCode::kParse, "edge list: missing 'nodes N' header");
  return DiGraph(*nodes, std::move(edges));
}

std::string format_edge_list(const DiGraph& g) {
  std::ostringstream os;
  os << "nodes " << g.size() << "\n";
  for (const auto& [p, c] : g.edges()) os << p + 1 << " " << c + 1 << "\n";
  return os.str();
}

DiGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open graph file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_edge_list(ss.str());
}

DiGraph manipulator_graph() {
  // Parent -> child pairs read off the reference Laplacian (a_ij = 1 iff j -> i).
  return DiGraph(6, {{2, 0}, {3, 0}, {0, 1}, {5, 1}, {1, 2}, {0, 3}, {4, 3}, {3, 4}, {5, 4}, {1, 5}, {4, 5}});
}

}  // namespace lipcons
