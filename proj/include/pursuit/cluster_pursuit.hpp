#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/laplacian.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/solvers.hpp"

namespace pursuit {

/// OMP stopped before driving the residual to zero while recovering a
/// connected component. Cannot happen in exact arithmetic; carries what OMP
/// had found.
class component_recovery_error : public error {
 public:
  component_recovery_error(const std::string& what, IndexSet partial) : error(what), partial_(std::move(partial)) {}
  const IndexSet& partial() const { return partial_; }

 private:
  IndexSet partial_;
};

/// Connected component of `seed` by sparse recovery: OMP on L with column
/// `seed` removed against y = -l_seed. When the residual vanishes the support
/// is exactly component(seed) \ {seed}.
template <ColumnOperator Op>
IndexSet connected_component_omp(const Op& lap, vertex_id seed, double residual_tol = 1e-8) {
  const std::size_t n = lap.cols();
  if (seed >= n) throw invalid_input("connected_component_omp: seed out of range");
  if (n == 1) return IndexSet::from_list({seed});
  ColumnRestriction<Op> phi(lap, IndexSet::range_without(n, seed));
  std::vector<double> y = lap.column(seed).to_dense();
  linalg::scale(-1.0, y);

  OmpOptions opt;
  opt.residual_tol = residual_tol;
  RecoveryResult res = omp(RecoveryProblem<ColumnRestriction<Op>>{phi, y, n - 1}, opt);
  IndexSet found = set_union(res.support.lift(phi.ambient()), IndexSet::from_list({seed}));
  if (res.stop != StopReason::residual_tolerance) {
    throw component_recovery_error("connected_component_omp: OMP stopped (" + std::string(to_string(res.stop)) +
                                       ") with residual " + std::to_string(res.residual_norm),
                                   std::move(found));
  }
  return found;
}

/// ceil(factor * (n0_hat - 1)), robust to the factor not being exactly
/// representable (10/9 * 9 must give 10, not 11).
inline std::size_t omega_budget(std::size_t n0_hat, double omega_factor) {
  const double raw = omega_factor * static_cast<double>(n0_hat - 1);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

struct ThresholdResult {
  IndexSet omega;
  /// The requested budget exceeded n - 1 and was clamped.
  bool clamped = false;
  std::size_t requested = 0;
};

/// Omega: the ceil(omega_factor (n0_hat - 1)) columns j != seed with the
/// largest |<l_j, l_seed>|, as original vertex ids.
template <ColumnOperator Op>
ThresholdResult threshold_stage(const Op& lap, vertex_id seed, std::size_t n0_hat, double omega_factor = 10.0 / 9.0) {
  const std::size_t n = lap.cols();
  if (seed >= n) throw invalid_input("threshold_stage: seed out of range");
  if (n0_hat < 1) throw invalid_input("threshold_stage: n0_hat must be positive");
  ThresholdResult out;
  out.requested = omega_budget(n0_hat, omega_factor);
  std::size_t budget = out.requested;
  if (budget > n - 1) {
    budget = n - 1;
    out.clamped = true;
  }
  const IndexSet others = IndexSet::range_without(n, seed);
  std::vector<double> corr = lap.apply_transpose(others, lap.column(seed).to_dense());
  out.omega = select_largest(corr, budget).lift(others);
  return out;
}

struct ScpConfig {
  vertex_id seed_vertex = 0;
  /// Estimated size of the seed's cluster.
  std::size_t n0_hat = 2;
  /// |Omega| = ceil(omega_factor * (n0_hat - 1)).
  double omega_factor = 10.0 / 9.0;
  SpOptions sp{};

  void validate(std::size_t n) const {
    if (seed_vertex >= n) throw invalid_input("ScpConfig: seed vertex " + std::to_string(seed_vertex) + " out of range");
    if (n0_hat < 2 || n0_hat > n) {
      throw invalid_input("ScpConfig: n0_hat=" + std::to_string(n0_hat) + " must lie in [2, " + std::to_string(n) + "]");
    }
    if (!(omega_factor > 1.0)) throw invalid_input("ScpConfig: omega_factor must exceed 1");
  }
};

struct ClusterResult {
  /// {seed} u (omega \ lambda_sharp)
  IndexSet cluster;
  IndexSet omega;
  IndexSet lambda_sharp;
  RecoveryResult sp_result;
  bool omega_clamped = false;
  /// |Omega| <= n0_hat - 1, so no outliers were sought (lambda_sharp empty).
  bool empty_sparsity = false;
  double threshold_seconds = 0.0;
  double recovery_seconds = 0.0;

  bool converged() const { return empty_sparsity || sp_result.converged(); }
};

/// Single Cluster Pursuit.
///
/// Omega comes from threshold_stage. The cluster is then carved out of Omega
/// by recovering the indicator of the outliers Lambda = Omega \ C: with
/// y = sum_{i in Omega} l_i + l_seed, L_Omega 1_Lambda = y holds exactly when
/// the graph has no inter-cluster edges, so Subspace Pursuit on (L_Omega, y)
/// with sparsity |Omega| - (n0_hat - 1) returns Lambda.
template <ColumnOperator Op>
ClusterResult scp(const Op& lap, const ScpConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const std::size_t n = lap.cols();
  cfg.validate(n);
  ClusterResult out;

  auto t0 = clock::now();
  ThresholdResult th = threshold_stage(lap, cfg.seed_vertex, cfg.n0_hat, cfg.omega_factor);
  out.omega = std::move(th.omega);
  out.omega_clamped = th.clamped;
  auto t1 = clock::now();
  out.threshold_seconds = std::chrono::duration<double>(t1 - t0).count();

  const IndexSet with_seed = set_union(out.omega, IndexSet::from_list({cfg.seed_vertex}));
  std::vector<double> ones(with_seed.size(), 1.0);
  std::vector<double> y = lap.apply(with_seed, ones);

  const auto omega_size = static_cast<std::ptrdiff_t>(out.omega.size());
  const std::ptrdiff_t outliers = omega_size - static_cast<std::ptrdiff_t>(cfg.n0_hat - 1);
  if (outliers <= 0) {
    out.empty_sparsity = true;
    out.sp_result.stop = StopReason::empty_budget;
    out.sp_result.residual_norm = linalg::norm2(y);
  } else {
    ColumnRestriction<Op> phi(lap, out.omega);
    out.sp_result =
        subspace_pursuit(RecoveryProblem<ColumnRestriction<Op>>{phi, y, static_cast<std::size_t>(outliers)}, cfg.sp);
    out.lambda_sharp = out.sp_result.support.lift(out.omega);
  }
  out.cluster = set_union(set_difference(out.omega, out.lambda_sharp), IndexSet::from_list({cfg.seed_vertex}));
  out.recovery_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  return out;
}

/// Target size of each cluster for Iterated SCP. The last entry is the size
/// of the remainder and is not used by any SCP round.
struct IscpSchedule {
  std::vector<std::size_t> sizes;

  static IscpSchedule uniform(std::size_t n0_hat, std::size_t k) { return {std::vector<std::size_t>(k, n0_hat)}; }
  std::size_t num_clusters() const { return sizes.size(); }
};

struct IscpOptions {
  double omega_factor = 10.0 / 9.0;
  SpOptions sp{};
};

struct IscpResult {
  /// Rounds' clusters get labels 0..rounds-1, the remainder the next label,
  /// and rejected vertices (if any) one final label of their own.
  Partition partition;
  /// Vertices left without any edge after earlier clusters were removed.
  IndexSet rejected;
  std::vector<ClusterResult> rounds;
  bool complete = true;
  /// Round that threw, when !complete.
  std::size_t failed_round = 0;
  std::string failure;
};

/// Iterated SCP: seed each round at the lowest-index unassigned vertex, run
/// SCP on the subgraph induced by the unassigned vertices, remove the found
/// cluster; the vertices left after k-1 rounds form the last cluster.
///
/// If a round throws, the result is marked incomplete and every unassigned
/// vertex lands in the rejected bucket.
inline IscpResult iscp(const SparseGraph& g, const IscpSchedule& schedule, const IscpOptions& opt = {}) {
  const std::size_t n = g.num_vertices();
  const std::size_t k = schedule.num_clusters();
  if (k == 0) throw invalid_input("iscp: empty size schedule");
  std::size_t total = 0;
  for (std::size_t s : schedule.sizes) total += s;
  if (total > n) throw invalid_input("iscp: scheduled sizes sum to " + std::to_string(total) + " > n=" + std::to_string(n));

  constexpr vertex_id unassigned = ~vertex_id{0};
  std::vector<vertex_id> label(n, unassigned);
  std::vector<vertex_id> rejected;
  IscpResult out;

  auto remaining_set = [&]() {
    std::vector<vertex_id> r;
    for (vertex_id v = 0; v < n; ++v) {
      if (label[v] == unassigned) r.push_back(v);
    }
    return IndexSet::from_sorted(std::move(r));
  };
  constexpr vertex_id reject_mark = unassigned - 1;
  // Drops vertices with no edge to the rest of `remaining`.
  auto prune_isolated = [&](IndexSet remaining) {
    if (remaining.empty()) return remaining;
    Subgraph sub = induced_subgraph(g, remaining);
    for (vertex_id local : sub.isolated) {
      label[sub.kept[local]] = reject_mark;
      rejected.push_back(sub.kept[local]);
    }
    return sub.isolated.empty() ? remaining : remaining_set();
  };

  vertex_id next_label = 0;
  for (std::size_t round = 0; round + 1 < k; ++round) {
    IndexSet remaining = prune_isolated(remaining_set());
    if (remaining.size() < 2) break;
    try {
      Subgraph sub = induced_subgraph(g, remaining);
      LaplacianView lap(sub.graph);
      ScpConfig cfg;
      cfg.seed_vertex = 0;
      cfg.n0_hat = std::min(std::max<std::size_t>(schedule.sizes[round], 2), remaining.size());
      cfg.omega_factor = opt.omega_factor;
      cfg.sp = opt.sp;
      ClusterResult cr = scp(lap, cfg);
      for (vertex_id local : cr.cluster) label[sub.kept[local]] = next_label;
      ++next_label;
      out.rounds.push_back(std::move(cr));
    } catch (const error& e) {
      out.complete = false;
      out.failed_round = round;
      out.failure = e.what();
      break;
    }
  }

  if (out.complete) {
    IndexSet rest = prune_isolated(remaining_set());
    if (!rest.empty()) {
      for (vertex_id v : rest) label[v] = next_label;
      ++next_label;
    }
  } else {
    for (vertex_id v : remaining_set()) {
      label[v] = reject_mark;
      rejected.push_back(v);
    }
  }

  if (!rejected.empty()) {
    for (vertex_id& l : label) {
      if (l == reject_mark) l = next_label;
    }
    ++next_label;
  }
  out.rejected = IndexSet::from_unsorted(std::move(rejected));
  out.partition = Partition(std::move(label), next_label);
  return out;
}

}  // namespace pursuit
