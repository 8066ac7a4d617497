// Independent oracles and seeded generators shared by the unit, property and
// acceptance tests. Nothing here calls the library's eigensolver or LU.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "lipcons/graph.hpp"
#include "lipcons/numkit.hpp"

namespace oracle {

using lipcons::DiGraph;
using lipcons::Mat;
using lipcons::Vec;

// Eigenvalues of a symmetric 2x2 matrix, ascending.
inline std::pair<double, double> eig2(double a, double b, double d) {
  const double tr = a + d;
  const double det = a * d - b * b;
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr - disc) / 2.0, (tr + disc) / 2.0};
}

// Determinant by cofactor expansion (small matrices only).
inline double det(const Mat& m) {
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0);
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Mat minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, jj = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, jj++) = m(i, j);
      }
    s += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * det(minor);
  }
  return s;
}

// Sylvester's criterion.
inline bool leading_minors_positive(const Mat& m) {
  for (std::size_t k = 1; k <= m.rows(); ++k) {
    if (!(det(m.block(0, 0, k, k)) > 0.0)) return false;
  }
  return true;
}

// Left null vector of a strongly connected Laplacian by power iteration on
// I - L/(2 d_max), which is row-stochastic-like with positive diagonal.
inline Vec perron_power(const Mat& lap, int iters = 200000) {
  const std::size_t n = lap.rows();
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, lap(i, i));
  const double h = 1.0 / (2.0 * dmax);
  Vec r(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = r[j];
      for (std::size_t i = 0; i < n; ++i) s -= h * r[i] * lap(i, j);
      next[j] = s;
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto& v : next) v /= sum;
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - r[j]));
    r.swap(next);
    if (diff < 1e-15) break;
  }
  return r;
}

// Weighted Rayleigh quotient xᵀ(RL+LᵀR)x / (2 xᵀRx).
inline double weighted_quotient(const Mat& lap, const Vec& r, const Vec& x) {
  const std::size_t n = lap.rows();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = 0.0;
    for (std::size_t j = 0; j < n; ++j) lx += lap(i, j) * x[j];
    num += 2.0 * r[i] * x[i] * lx;  // xᵀRLx + xᵀLᵀRx = 2 xᵀRLx
    den += r[i] * x[i] * x[i];
  }
  return num / (2.0 * den);
}

// Sampled minimum of the weighted quotient over Gaussian directions projected onto {rᵀx = 0}.
inline double rayleigh_sampled_min(const Mat& lap, const Vec& r, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = lap.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double rr = 0.0;
  for (double v : r) rr += v * v;
  auto project = [&](Vec& x) {
    double rx = 0.0;
    for (std::size_t i = 0; i < n; ++i) rx += r[i] * x[i];
    for (std::size_t i = 0; i < n; ++i) x[i] -= rx / rr * r[i];
  };
  double best = INFINITY;
  Vec x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& v : x) v = g(rng);
    project(x);
    best = std::min(best, weighted_quotient(lap, r, x));
  }
  return best;
}

inline Mat random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

inline Mat random_symmetric(std::size_t n, std::mt19937_64& rng) {
  Mat m = random_matrix(n, n, rng);
  return 0.5 * (m + m.transpose());
}

// Hamiltonian cycle over a random permutation plus extra random edges.
inline DiGraph random_strongly_connected(std::size_t n, std::mt19937_64& rng, double extra_prob = 0.25) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<DiGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(perm[i], perm[(i + 1) % n]);
  std::bernoulli_distribution coin(extra_prob);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) edges.emplace_back(i, j);
  return DiGraph(n, edges);
}

// Union of edge-disjoint random cycles: in-degree equals out-degree.
inline DiGraph random_balanced(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<DiGraph::Edge> edges;
  std::uniform_int_distribution<int> cycles(1, 3);
  const int k = cycles(rng);
  for (int c = 0; c < k; ++c) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    bool clash = false;
    for (std::size_t i = 0; i < n; ++i) clash |= used[perm[i]][perm[(i + 1) % n]];
    if (clash) continue;
    for (std::size_t i = 0; i < n; ++i) {
      used[perm[i]][perm[(i + 1) % n]] = true;
      edges.emplace_back(perm[i], perm[(i + 1) % n]);
    }
  }
  return DiGraph(n, edges);
}

// Arbitrary digraph (may or may not be connected).
inline DiGraph random_digraph(std::size_t n, std::mt19937_64& rng, double prob) {
  std::bernoulli_distribution coin(prob);
  std::vector<DiGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && coin(rng)) edges.emplace_back(i, j);
  return DiGraph(n, edges);
}

// Reachability by depth-first search from every node.
inline bool some_node_reaches_all(const DiGraph& g) {
  const std::size_t n = g.size();
  for (std::size_t root = 0; root < n; ++root) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{root};
    seen[root] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto [p, c] : g.edges())
        if (p == v && !seen[c]) {
          seen[c] = true;
          ++count;
          stack.push_back(c);
        }
    }
    if (count == n) return true;
  }
  return false;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace oracle
