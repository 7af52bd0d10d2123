#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/laplacian.hpp"
#include "pursuit/operator.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::diag {

/// Dense copy of the listed columns, in the order given.
template <ColumnOperator Op>
Eigen::MatrixXd dense_submatrix(const Op& op, const IndexSet& cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op.rows()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    SparseVector c = op.column(cols[j]);
    for (std::size_t e = 0; e < c.nnz(); ++e) m(c.indices[e], static_cast<Eigen::Index>(j)) = c.values[e];
  }
  return m;
}

template <ColumnOperator Op>
Eigen::MatrixXd dense_matrix(const Op& op) {
  return dense_submatrix(op, IndexSet::range(op.cols()));
}

/// Eigenvalues of L = I - D^{-1}A in ascending order, computed through the
/// similar symmetric matrix I - D^{-1/2} A D^{-1/2}.
inline std::vector<double> laplacian_spectrum(const SparseGraph& g, std::size_t max_n = 2000) {
  const std::size_t n = g.num_vertices();
  if (n > max_n) throw invalid_input("laplacian_spectrum: n=" + std::to_string(n) + " exceeds dense budget");
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (vertex_id i = 0; i < n; ++i) {
    if (g.degree(i) <= 0.0) throw invalid_input("laplacian_spectrum: vertex " + std::to_string(i) + " has degree 0");
    auto nb = g.neighbors(i);
    auto w = g.weights(i);
    for (std::size_t e = 0; e < nb.size(); ++e) s(i, nb[e]) -= w[e] / std::sqrt(g.degree(i) * g.degree(nb[e]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw error("laplacian_spectrum: eigensolver did not converge");
  const auto& ev = es.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// Number of s-subsets of N, saturating at +inf.
inline double binomial(std::size_t N, std::size_t s) {
  if (s > N) return 0.0;
  s = std::min(s, N - s);
  double c = 1.0;
  for (std::size_t i = 1; i <= s; ++i) c = c * static_cast<double>(N - s + i) / static_cast<double>(i);
  return std::round(c);
}

/// Calls f(const std::vector<vertex_id>&) for every s-subset of [0, N) in
/// lexicographic order; stops early when f returns false.
template <class F>
void for_each_combination(std::size_t N, std::size_t s, F&& f) {
  if (s > N) return;
  std::vector<vertex_id> c(s);
  std::iota(c.begin(), c.end(), vertex_id{0});
  while (true) {
    if (!f(static_cast<const std::vector<vertex_id>&>(c))) return;
    std::size_t i = s;
    while (i > 0 && c[i - 1] == N - s + i - 1) --i;
    if (i == 0) return;
    ++c[i - 1];
    for (std::size_t j = i; j < s; ++j) c[j] = c[j - 1] + 1;
  }
}

/// max(1 - sigma_min^2, sigma_max^2 - 1) of a dense column block. A block
/// with more columns than rows has sigma_min = 0.
inline double isometry_defect(const Eigen::MatrixXd& block) {
  if (block.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = block.cols() > block.rows() ? 0.0 : sv(sv.size() - 1);
  return std::max(1.0 - smin * smin, smax * smax - 1.0);
}

enum class RicMethod { exhaustive, sampled };

inline const char* to_string(RicMethod m) { return m == RicMethod::exhaustive ? "exhaustive" : "sampled"; }

struct RicReport {
  std::size_t s = 0;
  double delta = 0.0;
  IndexSet worst_set;
  RicMethod method = RicMethod::exhaustive;
  std::size_t subsets_evaluated = 0;
};

inline constexpr double kExhaustiveBudget = 1e6;

namespace detail {

inline constexpr double kRicTieTolerance = 1e-12;

template <ColumnOperator Op>
void ric_consider(const Op& op, const std::vector<vertex_id>& subset, RicReport& best, bool& any) {
  IndexSet set = IndexSet::from_sorted(std::vector<vertex_id>(subset));
  double d = isometry_defect(dense_submatrix(op, set));
  ++best.subsets_evaluated;
  // Only a clear improvement replaces the incumbent, so under lexicographic
  // enumeration the reported set is the smallest one achieving the maximum
  // up to round-off.
  if (!any || d > best.delta + kRicTieTolerance * std::max(1.0, std::abs(best.delta))) {
    best.delta = d;
    best.worst_set = std::move(set);
    any = true;
  }
}

}  // namespace detail

/// delta_s = max over |S| = s of max(1 - sigma_min(Phi_S)^2, sigma_max(Phi_S)^2 - 1),
/// by enumerating every subset.
template <ColumnOperator Op>
RicReport ric_bruteforce(const Op& op, std::size_t s, double budget = kExhaustiveBudget) {
  const std::size_t N = op.cols();
  if (s > N) throw invalid_input("ric_bruteforce: s=" + std::to_string(s) + " exceeds N=" + std::to_string(N));
  const double count = binomial(N, s);
  if (count > budget) {
    throw invalid_input("ric_bruteforce: C(" + std::to_string(N) + "," + std::to_string(s) +
                        ") subsets exceed the exhaustive budget; use ric_sampled");
  }
  RicReport out;
  out.s = s;
  out.method = RicMethod::exhaustive;
  if (s == 0) return out;
  bool any = false;
  for_each_combination(N, s, [&](const std::vector<vertex_id>& c) {
    detail::ric_consider(op, c, out, any);
    return true;
  });
  return out;
}

/// Lower bound on delta_s from `trials` uniformly random s-subsets. When
/// `trials` is at least C(N, s) every subset is evaluated once instead.
template <ColumnOperator Op>
RicReport ric_sampled(const Op& op, std::size_t s, std::size_t trials, std::uint64_t seed) {
  const std::size_t N = op.cols();
  if (trials < 1) throw invalid_input("ric_sampled: trials must be >= 1");
  if (s > N) throw invalid_input("ric_sampled: s=" + std::to_string(s) + " exceeds N=" + std::to_string(N));
  RicReport out;
  out.s = s;
  out.method = RicMethod::sampled;
  if (s == 0) return out;
  bool any = false;
  if (static_cast<double>(trials) >= binomial(N, s)) {
    for_each_combination(N, s, [&](const std::vector<vertex_id>& c) {
      detail::ric_consider(op, c, out, any);
      return true;
    });
    return out;
  }
  Rng rng(seed);
  std::vector<vertex_id> pool(N);
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(pool.begin(), pool.end(), vertex_id{0});
    for (std::size_t i = 0; i < s; ++i) std::swap(pool[i], pool[i + rng.below(N - i)]);
    std::vector<vertex_id> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s));
    std::sort(subset.begin(), subset.end());
    detail::ric_consider(op, subset, out, any);
  }
  return out;
}

struct CoherenceReport {
  /// max_{i != j} |<phi_i, phi_j>| / (|phi_i| |phi_j|)
  double normalized = 0.0;
  /// max_{i != j} |<phi_i, phi_j>|
  double unnormalized = 0.0;
  vertex_id normalized_pair[2] = {0, 0};
  vertex_id unnormalized_pair[2] = {0, 0};
};

template <ColumnOperator Op>
CoherenceReport coherence(const Op& op) {
  const std::size_t N = op.cols();
  if (N < 2) throw invalid_input("coherence: need at least 2 columns");
  std::vector<SparseVector> cols;
  std::vector<double> norms(N);
  cols.reserve(N);
  for (std::size_t j = 0; j < N; ++j) {
    cols.push_back(op.column(j));
    norms[j] = std::sqrt(dot(cols[j], cols[j]));
    if (norms[j] == 0.0) throw invalid_input("coherence: column " + std::to_string(j) + " is zero");
  }
  CoherenceReport out;
  for (vertex_id i = 0; i < N; ++i) {
    for (vertex_id j = i + 1; j < N; ++j) {
      const double g = std::abs(dot(cols[i], cols[j]));
      if (g > out.unnormalized) {
        out.unnormalized = g;
        out.unnormalized_pair[0] = i;
        out.unnormalized_pair[1] = j;
      }
      const double nrm = g / (norms[i] * norms[j]);
      if (nrm > out.normalized) {
        out.normalized = nrm;
        out.normalized_pair[0] = i;
        out.normalized_pair[1] = j;
      }
    }
  }
  return out;
}

/// chi_ij = sum_k A_ik A_kj.
inline double chi_statistic(const SparseGraph& g, vertex_id i, vertex_id j) {
  if (i >= g.num_vertices() || j >= g.num_vertices()) throw invalid_input("chi_statistic: vertex out of range");
  if (i == j) throw invalid_input("chi_statistic: requires i != j");
  auto ni = g.neighbors(i);
  auto wi = g.weights(i);
  auto nj = g.neighbors(j);
  auto wj = g.weights(j);
  double sum = 0.0;
  std::size_t a = 0, b = 0;
  while (a < ni.size() && b < nj.size()) {
    if (ni[a] < nj[b]) {
      ++a;
    } else if (nj[b] < ni[a]) {
      ++b;
    } else {
      sum += wi[a] * wj[b];
      ++a;
      ++b;
    }
  }
  return sum;
}

/// Concentration slack used by the degree bounds: 1/sqrt(ln n).
inline double default_alpha(std::size_t n) {
  if (n < 3) throw invalid_input("default_alpha: need n >= 3");
  return 1.0 / std::sqrt(std::log(static_cast<double>(n)));
}

struct InnerProductFloorReport {
  std::size_t pairs = 0;
  double min = 0.0;
  double mean = 0.0;
  double alpha = 0.0;
  double beta_sq = 0.0;
  double n0 = 0.0;
  /// beta^2 / ((1 + alpha) n0), the floor as the bound is usually quoted.
  double stated_floor = 0.0;
  /// 1 / ((1 + alpha) beta^2 n0), the leading term the lower-bound argument
  /// actually produces for non-adjacent pairs.
  double derived_floor = 0.0;
  double fraction_above_stated = 0.0;
  double fraction_above_derived = 0.0;
};

/// Samples `sample_pairs` intra-cluster pairs (i, j), i != j, uniformly by
/// drawing i then j from i's cluster, and summarizes |<l_i, l_j>|. n0 is the
/// mean cluster size.
inline InnerProductFloorReport intra_inner_product_floor(const LaplacianView& lap, const Partition& part,
                                                         std::size_t sample_pairs, std::uint64_t seed) {
  const std::size_t n = lap.cols();
  if (part.num_vertices() != n) throw invalid_input("intra_inner_product_floor: partition size mismatch");
  InnerProductFloorReport out;
  out.alpha = default_alpha(n);
  out.beta_sq = (1.0 + out.alpha) / (1.0 - out.alpha);
  out.n0 = static_cast<double>(n) / static_cast<double>(part.num_clusters());
  out.stated_floor = out.beta_sq / ((1.0 + out.alpha) * out.n0);
  out.derived_floor = 1.0 / ((1.0 + out.alpha) * out.beta_sq * out.n0);
  if (sample_pairs == 0) return out;

  std::vector<IndexSet> clusters;
  for (vertex_id c = 0; c < part.num_clusters(); ++c) clusters.push_back(part.cluster(c));
  bool any_pair = false;
  for (const auto& c : clusters) any_pair = any_pair || c.size() >= 2;
  if (!any_pair) return out;

  Rng rng(seed);
  double sum = 0.0;
  std::size_t above_stated = 0, above_derived = 0;
  out.min = std::numeric_limits<double>::infinity();
  while (out.pairs < sample_pairs) {
    const auto i = static_cast<vertex_id>(rng.below(n));
    const IndexSet& c = clusters[part.cluster_of(i)];
    if (c.size() < 2) continue;
    vertex_id j = i;
    while (j == i) j = c[rng.below(c.size())];
    const double v = std::abs(dot(lap.column(i), lap.column(j)));
    out.min = std::min(out.min, v);
    sum += v;
    above_stated += v >= out.stated_floor;
    above_derived += v >= out.derived_floor;
    ++out.pairs;
  }
  out.mean = sum / static_cast<double>(out.pairs);
  out.fraction_above_stated = static_cast<double>(above_stated) / static_cast<double>(out.pairs);
  out.fraction_above_derived = static_cast<double>(above_derived) / static_cast<double>(out.pairs);
  return out;
}

enum class RegimeHint { above, below, boundary };

inline const char* to_string(RegimeHint h) {
  switch (h) {
    case RegimeHint::above: return ">1";
    case RegimeHint::below: return "<1";
    case RegimeHint::boundary: return "boundary";
  }
  return "?";
}

struct RegimeReport {
  double value = 0.0;
  RegimeHint hint = RegimeHint::boundary;
};

/// (1/k)(sqrt(P) - sqrt(Q)) for p = P ln n / n, q = Q ln n / n. Advisory only.
inline RegimeReport recovery_regime(std::size_t k, double P, double Q, double boundary_tol = 1e-12) {
  if (k < 1) throw invalid_input("recovery_regime: k must be >= 1");
  if (!(P >= 0.0) || !(Q >= 0.0)) throw invalid_input("recovery_regime: P and Q must be nonnegative");
  RegimeReport r;
  r.value = (std::sqrt(P) - std::sqrt(Q)) / static_cast<double>(k);
  if (std::abs(r.value - 1.0) <= boundary_tol) {
    r.hint = RegimeHint::boundary;
  } else {
    r.hint = r.value > 1.0 ? RegimeHint::above : RegimeHint::below;
  }
  return r;
}

struct ErcReport {
  /// ||pinv(Phi_S) Phi_{S^c}||_{1->1}: the largest column l1 norm.
  double value = 0.0;
  bool holds = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

inline constexpr std::size_t kErcMaxColumns = 64;

/// Exact Recovery Condition quantity via a dense SVD pseudo-inverse.
template <ColumnOperator Op>
ErcReport erc_check(const Op& op, const IndexSet& support, double rank_tol = 1e-10) {
  const std::size_t N = op.cols();
  if (N > kErcMaxColumns) throw invalid_input("erc_check: N=" + std::to_string(N) + " exceeds dense budget");
  if (support.empty() || !support.fits(N)) throw invalid_input("erc_check: support must be a nonempty subset of columns");
  const IndexSet rest = set_difference(IndexSet::range(N), support);
  Eigen::MatrixXd phi_s = dense_submatrix(op, support);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi_s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  ErcReport out;
  out.sigma_max = sv(0);
  out.sigma_min = support.size() > op.rows() ? 0.0 : sv(sv.size() - 1);
  if (out.sigma_min <= rank_tol * std::max(1.0, out.sigma_max)) {
    throw invalid_input("erc_check: Phi_S is rank deficient (sigma_min=" + std::to_string(out.sigma_min) +
                        ", sigma_max=" + std::to_string(out.sigma_max) + ")");
  }
  if (rest.empty()) {
    out.holds = true;
    return out;
  }
  Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  Eigen::MatrixXd prod = pinv * dense_submatrix(op, rest);
  out.value = prod.cwiseAbs().colwise().sum().maxCoeff();
  out.holds = out.value < 1.0;
  return out;
}

struct PerturbationReport {
  /// Max row sums (inf-norms) and max column sums (1-norms) of E^1 and E^2.
  double e1_inf = 0.0;
  double e2_inf = 0.0;
  double e1_one = 0.0;
  double e2_one = 0.0;
  /// max_i r_i and max_i r_i / (1 + r_i) over vertices.
  double r_max = 0.0;
  double r_ratio_max = 0.0;
  /// Vertices with no in-cluster edge; L^0 is undefined there.
  std::size_t zero_in_degree = 0;
};

/// Splits E = L - L^0, where L^0 is the Laplacian of the in-cluster edges,
/// into E^1 (supported on in-cluster edges) and E^2 (on cross-cluster edges)
/// and reports their norms. Row k of L is (delta_k. - A_k./d_k), so both
/// parts are sparse and are accumulated directly.
inline PerturbationReport perturbation_split(const SparseGraph& g, const Partition& part) {
  const std::size_t n = g.num_vertices();
  if (part.num_vertices() != n) throw invalid_input("perturbation_split: partition size mismatch");
  std::vector<double> d0(n, 0.0), de(n, 0.0);
  for (vertex_id k = 0; k < n; ++k) {
    auto nb = g.neighbors(k);
    auto w = g.weights(k);
    for (std::size_t e = 0; e < nb.size(); ++e) (part.cluster_of(nb[e]) == part.cluster_of(k) ? d0[k] : de[k]) += w[e];
  }
  PerturbationReport out;
  std::vector<double> col1(n, 0.0), col2(n, 0.0);
  for (vertex_id k = 0; k < n; ++k) {
    if (d0[k] <= 0.0) {
      ++out.zero_in_degree;
      continue;
    }
    const double d = d0[k] + de[k];
    const double r = de[k] / d0[k];
    out.r_max = std::max(out.r_max, r);
    out.r_ratio_max = std::max(out.r_ratio_max, r / (1.0 + r));
    double row1 = 0.0, row2 = 0.0;
    auto nb = g.neighbors(k);
    auto w = g.weights(k);
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (part.cluster_of(nb[e]) == part.cluster_of(k)) {
        const double v = std::abs(w[e] / d0[k] - w[e] / d);
        row1 += v;
        col1[nb[e]] += v;
      } else {
        const double v = w[e] / d;
        row2 += v;
        col2[nb[e]] += v;
      }
    }
    out.e1_inf = std::max(out.e1_inf, row1);
    out.e2_inf = std::max(out.e2_inf, row2);
  }
  for (std::size_t j = 0; j < n; ++j) {
    out.e1_one = std::max(out.e1_one, col1[j]);
    out.e2_one = std::max(out.e2_one, col2[j]);
  }
  return out;
}

}  // namespace pursuit::diag
