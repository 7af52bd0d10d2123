#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

/// Parameters of the stochastic block model G(n, k, p, q).
struct SbmParams {
  std::size_t n = 0;
  std::size_t k = 1;
  double p = 0.0;  // intra-block edge probability
  double q = 0.0;  // inter-block edge probability
  /// Per-block sizes; empty means n/k each (requires k | n).
  std::vector<std::size_t> sizes;

  std::vector<std::size_t> block_sizes() const {
    if (!sizes.empty()) return sizes;
    return std::vector<std::size_t>(k, k == 0 ? 0 : n / k);
  }

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
      throw invalid_input("SbmParams: probabilities must lie in [0,1]");
    }
    if (q > p) throw invalid_input("SbmParams: require q <= p");
    if (k < 1) throw invalid_input("SbmParams: k must be >= 1");
    if (!sizes.empty()) {
      if (sizes.size() != k) throw invalid_input("SbmParams: sizes has " + std::to_string(sizes.size()) + " entries, k=" + std::to_string(k));
      if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != n) {
        throw invalid_input("SbmParams: sizes do not sum to n");
      }
      for (std::size_t s : sizes) {
        if (s == 0) throw invalid_input("SbmParams: empty block");
      }
    } else if (n % k != 0) {
      throw invalid_input("SbmParams: k must divide n when sizes are not given");
    } else if (n == 0) {
      throw invalid_input("SbmParams: n must be positive");
    }
  }
};

struct SbmSample {
  SparseGraph graph;
  Partition truth;
  /// old label -> new label when the sample was permuted, empty otherwise.
  std::vector<vertex_id> permutation;
  /// Vertices that drew no edge at all; callers decide to drop or fail.
  IndexSet isolated;
};

namespace detail {

/// Below this probability, pairs are sampled by geometric skipping instead
/// of one Bernoulli draw per pair.
inline constexpr double kSkipSamplerThreshold = 0.01;

/// Samples each pair (i, j) with i in rows and j in [col_lo(i), col_hi) with
/// probability prob, appending hits to edges.
template <class ColLo>
void sample_rectangle(Rng& rng, vertex_id row_lo, vertex_id row_hi, ColLo col_lo, vertex_id col_hi, double prob,
                      std::vector<Edge>& edges) {
  if (prob <= 0.0) return;
  if (prob >= 1.0) {
    for (vertex_id i = row_lo; i < row_hi; ++i) {
      for (vertex_id j = col_lo(i); j < col_hi; ++j) edges.push_back({i, j, 1.0});
    }
    return;
  }
  if (prob >= kSkipSamplerThreshold) {
    for (vertex_id i = row_lo; i < row_hi; ++i) {
      for (vertex_id j = col_lo(i); j < col_hi; ++j) {
        if (rng.bernoulli(prob)) edges.push_back({i, j, 1.0});
      }
    }
    return;
  }
  // Geometric skipping over the row-major sequence of pairs.
  std::uint64_t skip = rng.geometric(prob);
  for (vertex_id i = row_lo; i < row_hi; ++i) {
    vertex_id lo = col_lo(i);
    std::uint64_t len = col_hi > lo ? col_hi - lo : 0;
    std::uint64_t pos = skip;
    while (pos < len) {
      edges.push_back({i, static_cast<vertex_id>(lo + pos), 1.0});
      std::uint64_t g = rng.geometric(prob);
      if (g >= std::numeric_limits<std::uint64_t>::max() - pos) {
        pos = std::numeric_limits<std::uint64_t>::max();
        break;
      }
      pos += 1 + g;
    }
    if (pos == std::numeric_limits<std::uint64_t>::max()) return;
    skip = pos - len;
  }
}

}  // namespace detail

/// Samples G(n, k, p, q). Blocks are contiguous index ranges fixed before any
/// edge is drawn; block pairs are visited in order (a, b) with a <= b, so the
/// output is a pure function of (params, seed). With `permute`, vertices are
/// relabelled by a seeded uniform permutation drawn after the edges.
inline SbmSample gen_sbm(const SbmParams& params, std::uint64_t seed, bool permute = false) {
  params.validate();
  const auto sizes = params.block_sizes();
  std::vector<vertex_id> start(sizes.size() + 1, 0);
  for (std::size_t b = 0; b < sizes.size(); ++b) start[b + 1] = start[b] + static_cast<vertex_id>(sizes[b]);

  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    for (std::size_t b = a; b < sizes.size(); ++b) {
      if (a == b) {
        detail::sample_rectangle(rng, start[a], start[a + 1], [](vertex_id i) { return i + 1; }, start[a + 1],
                                 params.p, edges);
      } else {
        const vertex_id lo = start[b];
        detail::sample_rectangle(rng, start[a], start[a + 1], [lo](vertex_id) { return lo; }, start[b + 1],
                                 params.q, edges);
      }
    }
  }

  Partition truth = Partition::contiguous(sizes);
  std::vector<vertex_id> perm;
  if (permute) {
    perm = rng.permutation(params.n);
    for (Edge& e : edges) {
      e.u = perm[e.u];
      e.v = perm[e.v];
    }
    std::vector<vertex_id> assignment(params.n);
    for (std::size_t v = 0; v < params.n; ++v) assignment[perm[v]] = truth.cluster_of(static_cast<vertex_id>(v));
    truth = Partition(std::move(assignment), sizes.size());
  }

  SbmSample out{build_graph(params.n, std::move(edges)), std::move(truth), std::move(perm), {}};
  out.isolated = out.graph.isolated_vertices();
  return out;
}

/// Erdos-Renyi G(n0, p): the single-block SBM.
inline SbmSample gen_er(std::size_t n0, double p, std::uint64_t seed) {
  return gen_sbm(SbmParams{n0, 1, p, p, {}}, seed);
}

/// In-community degree, out-of-community degree and their ratio for one vertex.
struct DegreeSplit {
  double in = 0.0;
  double out = 0.0;
  /// out / in; +inf when in == 0.
  double ratio = 0.0;
  bool ratio_infinite() const { return std::isinf(ratio); }
};

inline std::vector<DegreeSplit> degree_split(const SparseGraph& g, const Partition& part) {
  if (part.num_vertices() != g.num_vertices()) {
    throw invalid_input("degree_split: partition covers " + std::to_string(part.num_vertices()) +
                        " vertices, graph has " + std::to_string(g.num_vertices()));
  }
  std::vector<DegreeSplit> out(g.num_vertices());
  for (vertex_id i = 0; i < g.num_vertices(); ++i) {
    auto nb = g.neighbors(i);
    auto w = g.weights(i);
    DegreeSplit& s = out[i];
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (part.cluster_of(nb[e]) == part.cluster_of(i)) {
        s.in += w[e];
      } else {
        s.out += w[e];
      }
    }
    s.ratio = s.in > 0.0 ? s.out / s.in : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace pursuit
