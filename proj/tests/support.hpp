#pragma once

#include <Eigen/Dense>

#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/laplacian.hpp"
#include "pursuit/rng.hpp"

namespace fixtures {

using namespace pursuit;

inline SparseGraph k3() { return build_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }
inline SparseGraph path3() { return build_graph(3, {{0, 1}, {1, 2}}); }
inline SparseGraph two_edges() { return build_graph(4, {{0, 1}, {2, 3}}); }
inline SparseGraph two_k3() { return build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}); }
inline SparseGraph k4() { return build_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}); }

/// Dense I - D^{-1} A built straight from the edge list, independent of
/// LaplacianView.
inline Eigen::MatrixXd dense_rw_laplacian(const SparseGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(e.u, e.v) = e.weight;
    a(e.v, e.u) = e.weight;
  }
  Eigen::VectorXd d = a.rowwise().sum();
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) l.row(i) -= a.row(i) / d(i);
  return l;
}

/// Erdos-Renyi graph with random positive weights, drawn with its own
/// Bernoulli loop.
inline SparseGraph random_weighted_graph(std::size_t n, double p, std::uint64_t seed, bool weighted = true) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (vertex_id i = 0; i < n; ++i) {
    for (vertex_id j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) edges.push_back({i, j, weighted ? 0.5 + rng.uniform() : 1.0});
    }
  }
  return build_graph(n, std::move(edges));
}

/// Random connected graph: a random spanning path plus extra random edges.
inline SparseGraph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  auto perm = rng.permutation(n);
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  std::vector<Edge> edges;
  auto add = [&](vertex_id a, vertex_id b) {
    if (a > b) std::swap(a, b);
    if (a == b || has[a][b]) return;
    has[a][b] = true;
    edges.push_back({a, b, 1.0});
  };
  for (std::size_t i = 0; i + 1 < n; ++i) add(perm[i], perm[i + 1]);
  for (vertex_id i = 0; i < n; ++i) {
    for (vertex_id j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) add(i, j);
    }
  }
  return build_graph(n, std::move(edges));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace fixtures
