#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/points.hpp"

namespace pursuit {

/// A_ij = exp(-|x_i - x_j|^2 / sigma^2), zero diagonal.
inline Eigen::MatrixXd gaussian_affinity(const PointCloud& pts, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw invalid_input("gaussian_affinity: sigma must be positive");
  const std::size_t n = pts.size();
  if (n < 2) throw invalid_input("gaussian_affinity: need at least 2 points");
  const double s2 = sigma * sigma;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = squared_distance(pts.row(i), pts.row(j));
      if (!std::isfinite(d2)) throw invalid_input("gaussian_affinity: non-finite distance");
      const double v = std::exp(-d2 / s2);
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return a;
}

/// Keeps edge {i,j} with weight A_ij when j is among the K highest-affinity
/// (nearest) neighbours of i or vice versa. Ties at the K-th place go to the
/// lower index.
inline SparseGraph knn_sparsify(const Eigen::MatrixXd& aff, std::size_t K) {
  const auto n = static_cast<std::size_t>(aff.rows());
  if (aff.cols() != aff.rows()) throw invalid_input("knn_sparsify: affinity must be square");
  if (K < 1 || K >= n) throw invalid_input("knn_sparsify: need 1 <= K < n");
  std::vector<std::vector<bool>> keep(n, std::vector<bool>(n, false));
  std::vector<vertex_id> order(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(static_cast<vertex_id>(j));
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(K), order.end(),
                      [&](vertex_id a, vertex_id b) {
                        const double va = aff(static_cast<Eigen::Index>(i), a);
                        const double vb = aff(static_cast<Eigen::Index>(i), b);
                        return va != vb ? va > vb : a < b;
                      });
    for (std::size_t t = 0; t < K; ++t) {
      const vertex_id j = order[t];
      keep[std::min<std::size_t>(i, j)][std::max<std::size_t>(i, j)] = true;
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!keep[i][j]) continue;
      const double w = aff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!(w > 0.0)) {
        throw invalid_input("knn_sparsify: neighbour pair (" + std::to_string(i) + "," + std::to_string(j) +
                            ") has affinity " + std::to_string(w) + "; increase sigma");
      }
      edges.push_back({static_cast<vertex_id>(i), static_cast<vertex_id>(j), w});
    }
  }
  return build_graph(n, std::move(edges));
}

inline SparseGraph knn_graph(const PointCloud& pts, double sigma, std::size_t K) {
  return knn_sparsify(gaussian_affinity(pts, sigma), K);
}

struct DegreeThresholdResult {
  SparseGraph graph;
  /// Kept vertices as original ids; new id t corresponds to kept[t].
  IndexSet kept;
  std::size_t passes = 0;
  /// Vertices a further pass at the same threshold would drop.
  std::size_t second_pass_drops = 0;
};

/// Drops vertices with fewer than d_thresh neighbours in the input graph and
/// returns the induced subgraph. With `iterate`, repeats until no vertex
/// falls below the threshold.
inline DegreeThresholdResult degree_threshold(const SparseGraph& g, std::size_t d_thresh, bool iterate = false) {
  auto below = [d_thresh](const SparseGraph& h) {
    std::vector<vertex_id> keep;
    for (vertex_id i = 0; i < h.num_vertices(); ++i) {
      if (h.neighbor_count(i) >= d_thresh) keep.push_back(i);
    }
    return IndexSet::from_sorted(std::move(keep));
  };
  DegreeThresholdResult out;
  out.graph = g;
  out.kept = IndexSet::range(g.num_vertices());
  while (true) {
    IndexSet keep = below(out.graph);
    if (keep.size() == out.graph.num_vertices()) break;
    if (keep.empty()) throw invalid_input("degree_threshold: every vertex falls below d_thresh=" + std::to_string(d_thresh));
    Subgraph sub = induced_subgraph(out.graph, keep);
    out.kept = keep.lift(out.kept);
    out.graph = std::move(sub.graph);
    ++out.passes;
    if (!iterate) break;
  }
  out.second_pass_drops = out.graph.num_vertices() - below(out.graph).size();
  return out;
}

/// |found \ truth| / |found|.
inline double misclassification(const IndexSet& found, const IndexSet& truth) {
  if (found.empty()) throw invalid_input("misclassification: found set is empty");
  return static_cast<double>(set_difference(found, truth).size()) / static_cast<double>(found.size());
}

/// Maximum-weight perfect matching on a square matrix (Hungarian method);
/// returns match[row] = column.
inline std::vector<std::size_t> max_weight_matching(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  if (n == 0) return {};
  double top = 0.0;
  for (const auto& r : w) {
    if (r.size() != n) throw invalid_input("max_weight_matching: matrix must be square");
    for (double v : r) top = std::max(top, v);
  }
  // Minimize cost = top - w with the classical O(n^3) potentials scheme
  // (1-based, row 0 / column 0 are sentinels).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = (top - w[i0 - 1][j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> match(n);
  for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

struct PartitionAgreement {
  /// Fraction of vertices whose label agrees under the best label matching.
  double accuracy = 0.0;
  /// confusion[a][b] = |{v : a(v) = a, b(v) = b}|, padded to a square.
  std::vector<std::vector<std::size_t>> confusion;
  /// Cluster of b matched to each cluster of a (padding clusters included).
  std::vector<std::size_t> matching;
};

inline PartitionAgreement partition_accuracy(const Partition& a, const Partition& b) {
  if (a.num_vertices() != b.num_vertices()) throw invalid_input("partition_accuracy: vertex counts differ");
  if (a.num_vertices() == 0) throw invalid_input("partition_accuracy: empty partitions");
  const std::size_t k = std::max(a.num_clusters(), b.num_clusters());
  PartitionAgreement out;
  out.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (vertex_id v = 0; v < a.num_vertices(); ++v) ++out.confusion[a.cluster_of(v)][b.cluster_of(v)];
  std::vector<std::vector<double>> w(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) w[i][j] = static_cast<double>(out.confusion[i][j]);
  }
  out.matching = max_weight_matching(w);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < k; ++i) hit += out.confusion[i][out.matching[i]];
  out.accuracy = static_cast<double>(hit) / static_cast<double>(a.num_vertices());
  return out;
}

}  // namespace pursuit
