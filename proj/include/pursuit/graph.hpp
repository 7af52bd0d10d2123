#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pursuit/core.hpp"

namespace pursuit {

struct Edge {
  vertex_id u;
  vertex_id v;
  double weight = 1.0;
};

/// Undirected weighted graph in CSR layout.
///
/// Both directions of every edge are stored, neighbours of a row are sorted
/// by column, and there are no self-loops or duplicates. Immutable once built.
class SparseGraph {
 public:
  SparseGraph() = default;

  std::size_t num_vertices() const { return degrees_.size(); }
  /// Undirected edge count.
  std::size_t num_edges() const { return col_indices_.size() / 2; }

  std::span<const vertex_id> neighbors(vertex_id i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> weights(vertex_id i) const {
    return {weights_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Weighted degree d_i.
  double degree(vertex_id i) const { return degrees_[i]; }
  /// Number of neighbours, ignoring weights.
  std::size_t neighbor_count(vertex_id i) const { return row_offsets_[i + 1] - row_offsets_[i]; }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const vertex_id> col_indices() const { return col_indices_; }
  std::span<const double> edge_weights() const { return weights_; }
  std::span<const double> degrees() const { return degrees_; }

  /// Weight of edge {i,j}, 0 if absent.
  double weight(vertex_id i, vertex_id j) const {
    auto nb = neighbors(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return 0.0;
    return weights_[row_offsets_[i] + static_cast<std::size_t>(it - nb.begin())];
  }

  /// True when every weight is exactly 1.
  bool unweighted() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
  }

  /// Edges with u < v, ordered by (u, v).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (vertex_id i = 0; i < num_vertices(); ++i) {
      auto nb = neighbors(i);
      auto w = weights(i);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        if (nb[e] > i) out.push_back({i, nb[e], w[e]});
      }
    }
    return out;
  }

  /// Vertices with no incident edge.
  IndexSet isolated_vertices() const {
    std::vector<vertex_id> out;
    for (vertex_id i = 0; i < num_vertices(); ++i) {
      if (neighbor_count(i) == 0) out.push_back(i);
    }
    return IndexSet::from_sorted(std::move(out));
  }

 private:
  friend SparseGraph build_graph(std::size_t n, std::vector<Edge> edges);

  std::vector<std::size_t> row_offsets_{0};
  std::vector<vertex_id> col_indices_;
  std::vector<double> weights_;
  std::vector<double> degrees_;
};

/// Builds the symmetric CSR graph from an undirected edge list.
///
/// Each edge must appear once (in either orientation). Rejects self-loops,
/// duplicates, out-of-range endpoints and non-positive or non-finite weights.
inline SparseGraph build_graph(std::size_t n, std::vector<Edge> edges) {
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw invalid_input("build_graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") out of range for n=" + std::to_string(n));
    }
    if (e.u == e.v) throw invalid_input("build_graph: self-loop at vertex " + std::to_string(e.u));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw invalid_input("build_graph: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") has non-positive weight");
    }
  }

  // Directed copies, sorted by (row, col); a duplicate undirected edge shows
  // up as two equal adjacent keys.
  std::vector<std::pair<std::uint64_t, double>> arcs;
  arcs.reserve(2 * edges.size());
  for (const Edge& e : edges) {
    arcs.emplace_back((std::uint64_t{e.u} << 32) | e.v, e.weight);
    arcs.emplace_back((std::uint64_t{e.v} << 32) | e.u, e.weight);
  }
  std::sort(arcs.begin(), arcs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < arcs.size(); ++k) {
    if (arcs[k].first == arcs[k - 1].first) {
      auto u = static_cast<vertex_id>(arcs[k].first >> 32);
      auto v = static_cast<vertex_id>(arcs[k].first & 0xffffffffu);
      throw invalid_input("build_graph: duplicate edge (" + std::to_string(std::min(u, v)) + "," +
                          std::to_string(std::max(u, v)) + ")");
    }
  }

  SparseGraph g;
  g.row_offsets_.assign(n + 1, 0);
  g.col_indices_.resize(arcs.size());
  g.weights_.resize(arcs.size());
  g.degrees_.assign(n, 0.0);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    auto row = static_cast<vertex_id>(arcs[k].first >> 32);
    g.row_offsets_[row + 1]++;
    g.col_indices_[k] = static_cast<vertex_id>(arcs[k].first & 0xffffffffu);
    g.weights_[k] = arcs[k].second;
  }
  for (std::size_t i = 0; i < n; ++i) g.row_offsets_[i + 1] += g.row_offsets_[i];
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t k = g.row_offsets_[i]; k < g.row_offsets_[i + 1]; ++k) d += g.weights_[k];
    g.degrees_[i] = d;
  }
  return g;
}

struct Subgraph {
  SparseGraph graph;
  /// new id -> old id; position in this set is the new id.
  IndexSet kept;
  /// New ids of vertices with no edge inside the subgraph.
  IndexSet isolated;

  /// Old id -> new id, or num_vertices() of the parent when dropped.
  vertex_id to_new(vertex_id old_id) const { return static_cast<vertex_id>(kept.position(old_id)); }
};

/// Subgraph induced on `keep`, relabelled 0..|keep|-1 in increasing old-id order.
inline Subgraph induced_subgraph(const SparseGraph& g, const IndexSet& keep) {
  if (keep.empty()) throw invalid_input("induced_subgraph: empty vertex set");
  if (!keep.fits(g.num_vertices())) throw invalid_input("induced_subgraph: vertex out of range");

  constexpr vertex_id absent = ~vertex_id{0};
  std::vector<vertex_id> remap(g.num_vertices(), absent);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = static_cast<vertex_id>(k);

  std::vector<Edge> edges;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    vertex_id old = keep[k];
    auto nb = g.neighbors(old);
    auto w = g.weights(old);
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (nb[e] > old && remap[nb[e]] != absent) {
        edges.push_back({static_cast<vertex_id>(k), remap[nb[e]], w[e]});
      }
    }
  }
  Subgraph out{build_graph(keep.size(), std::move(edges)), keep, {}};
  out.isolated = out.graph.isolated_vertices();
  return out;
}

/// Component label per vertex via BFS; labels are assigned in order of the
/// smallest vertex of each component.
inline std::vector<vertex_id> connected_components(const SparseGraph& g, std::size_t* count = nullptr) {
  constexpr vertex_id unseen = ~vertex_id{0};
  std::vector<vertex_id> label(g.num_vertices(), unseen);
  vertex_id next = 0;
  std::queue<vertex_id> frontier;
  for (vertex_id s = 0; s < g.num_vertices(); ++s) {
    if (label[s] != unseen) continue;
    label[s] = next;
    frontier.push(s);
    while (!frontier.empty()) {
      vertex_id u = frontier.front();
      frontier.pop();
      for (vertex_id v : g.neighbors(u)) {
        if (label[v] == unseen) {
          label[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

/// Vertices reachable from `seed`, including `seed`.
inline IndexSet bfs_component(const SparseGraph& g, vertex_id seed) {
  if (seed >= g.num_vertices()) throw invalid_input("bfs_component: seed out of range");
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<vertex_id> out{seed};
  seen[seed] = 1;
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (vertex_id v : g.neighbors(out[head])) {
      if (!seen[v]) {
        seen[v] = 1;
        out.push_back(v);
      }
    }
  }
  return IndexSet::from_unsorted(std::move(out));
}

}  // namespace pursuit
