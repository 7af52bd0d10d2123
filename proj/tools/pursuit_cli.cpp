// Command-line front end: graph generation, cluster pursuit, baselines,
// diagnostics and benchmarks. Reports go to stdout as key=value lines.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pursuit/pursuit.hpp"

using namespace pursuit;

namespace {

template <class T>
void kv(const std::string& key, const T& value) {
  std::cout << key << '=' << value << '\n';
}

void kv(const std::string& key, double value) { std::cout << key << '=' << io::detail::format_double(value) << '\n'; }

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (auto f : io::detail::split(s, ", ")) {
    std::size_t v = 0;
    if (!io::detail::parse_number(f, v)) throw invalid_input("bad size `" + std::string(f) + "`");
    out.push_back(v);
  }
  return out;
}

std::string join(const IndexSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

/// A graph as loaded, optionally with isolated vertices removed; `kept`
/// maps working ids back to file ids.
struct LoadedGraph {
  SparseGraph graph;
  IndexSet kept;
  std::size_t dropped = 0;

  vertex_id to_file(vertex_id v) const { return kept[v]; }
  vertex_id to_working(vertex_id file_id) const {
    const std::size_t pos = kept.position(file_id);
    if (pos == kept.size()) throw invalid_input("vertex " + std::to_string(file_id) + " was dropped as isolated");
    return static_cast<vertex_id>(pos);
  }
  IndexSet lift(const IndexSet& s) const { return s.lift(kept); }
};

LoadedGraph load_graph(const std::string& path, bool drop_isolated) {
  LoadedGraph lg;
  lg.graph = io::read_edge_list(path);
  IndexSet iso = lg.graph.isolated_vertices();
  lg.kept = IndexSet::range(lg.graph.num_vertices());
  if (iso.empty()) return lg;
  if (!drop_isolated) {
    throw invalid_input(path + ": " + std::to_string(iso.size()) + " isolated vertices (first " +
                        std::to_string(iso[0]) + "); pass --drop-isolated to remove them");
  }
  lg.kept = set_difference(IndexSet::range(lg.graph.num_vertices()), iso);
  lg.graph = induced_subgraph(lg.graph, lg.kept).graph;
  lg.dropped = iso.size();
  return lg;
}

/// Partition over file ids; dropped vertices get one extra label.
Partition lift_partition(const LoadedGraph& lg, const Partition& p, std::size_t file_n) {
  std::vector<vertex_id> labels(file_n, static_cast<vertex_id>(p.num_clusters()));
  for (vertex_id v = 0; v < p.num_vertices(); ++v) labels[lg.to_file(v)] = p.cluster_of(v);
  return Partition::from_labels(labels);
}

void write_records(const std::vector<bench::ExperimentRecord>& records, const std::string& path) {
  auto out = io::detail::open_out(path);
  bench::write_csv(records, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community detection by cluster pursuit"};
  app.require_subcommand(1);

  // gen-sbm
  auto* gen = app.add_subcommand("gen-sbm", "Sample a stochastic block model graph");
  std::size_t g_n = 0, g_k = 1;
  double g_p = 0.0, g_q = 0.0;
  std::string g_sizes, g_out, g_labels;
  std::uint64_t g_seed = 0;
  bool g_permute = false, g_fail_isolated = false;
  gen->add_option("--n", g_n, "Number of vertices")->required();
  gen->add_option("--k", g_k, "Number of blocks")->required();
  gen->add_option("--p", g_p, "In-block edge probability")->required();
  gen->add_option("--q", g_q, "Cross-block edge probability")->required();
  gen->add_option("--sizes", g_sizes, "Comma-separated block sizes");
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--out", g_out, "Edge list output")->required();
  gen->add_option("--labels", g_labels, "Ground-truth labels output");
  gen->add_flag("--permute", g_permute, "Randomly relabel vertices");
  gen->add_flag("--fail-on-isolated", g_fail_isolated, "Exit with an error if a vertex has no edges");

  // scp
  auto* scp_cmd = app.add_subcommand("scp", "Recover the cluster of one seed vertex");
  std::string s_graph, s_out, s_range;
  vertex_id s_seed = 0;
  std::size_t s_n0 = 0;
  double s_omega = 10.0 / 9.0;
  bool s_drop = false;
  scp_cmd->add_option("--graph", s_graph, "Edge list")->required();
  scp_cmd->add_option("--seed-vertex", s_seed, "Seed vertex id");
  scp_cmd->add_option("--n0", s_n0, "Estimated cluster size");
  scp_cmd->add_option("--n0-range", s_range, "Sweep lo:hi[:step] instead of a single --n0");
  scp_cmd->add_option("--omega-factor", s_omega, "Size of Omega relative to n0-1");
  scp_cmd->add_option("--out", s_out, "Output (cluster.csv, or n0_hat,vertex rows in sweep mode)")->required();
  scp_cmd->add_flag("--drop-isolated", s_drop, "Remove vertices without edges before running");

  // iscp
  auto* iscp_cmd = app.add_subcommand("iscp", "Partition a graph by iterated cluster pursuit");
  std::string i_graph, i_sizes, i_out;
  double i_omega = 10.0 / 9.0;
  bool i_drop = false;
  iscp_cmd->add_option("--graph", i_graph, "Edge list")->required();
  iscp_cmd->add_option("--sizes", i_sizes, "Estimated cluster sizes, one per cluster")->required();
  iscp_cmd->add_option("--omega-factor", i_omega, "Size of Omega relative to n0-1");
  iscp_cmd->add_option("--out", i_out, "Partition output (vertex,cluster)")->required();
  iscp_cmd->add_flag("--drop-isolated", i_drop, "Remove vertices without edges before running");

  // cocluster
  auto* cc_cmd = app.add_subcommand("cocluster", "Co-cluster rows and columns of a nonnegative matrix");
  std::string c_matrix, c_rows, c_cols;
  std::size_t c_n0 = 0, c_k = 0;
  double c_omega = 10.0 / 9.0;
  cc_cmd->add_option("--matrix", c_matrix, "Dense CSV matrix")->required();
  cc_cmd->add_option("--n0x", c_n0, "Estimated rows per block")->required();
  cc_cmd->add_option("--k", c_k, "Number of blocks")->required();
  cc_cmd->add_option("--omega-factor", c_omega, "Size of Omega relative to n0-1");
  cc_cmd->add_option("--out-rows", c_rows, "Row partition output")->required();
  cc_cmd->add_option("--out-cols", c_cols, "Column partition output")->required();

  // sc
  auto* sc_cmd = app.add_subcommand("sc", "Spectral clustering baseline");
  std::string sc_graph, sc_out;
  std::size_t sc_k = 2;
  std::uint64_t sc_seed = 0;
  bool sc_drop = false;
  sc_cmd->add_option("--graph", sc_graph, "Edge list")->required();
  sc_cmd->add_option("--k", sc_k, "Number of clusters")->required();
  sc_cmd->add_option("--seed", sc_seed, "k-means seed");
  sc_cmd->add_option("--out", sc_out, "Partition output")->required();
  sc_cmd->add_flag("--drop-isolated", sc_drop, "Remove vertices without edges before running");

  // knn-graph
  auto* knn_cmd = app.add_subcommand("knn-graph", "Gaussian-affinity k-nearest-neighbour graph from points");
  std::string k_points, k_out;
  double k_sigma = 1.0;
  std::size_t k_k = 1;
  knn_cmd->add_option("--points", k_points, "Points CSV (no header)")->required();
  knn_cmd->add_option("--sigma", k_sigma, "Affinity bandwidth")->required();
  knn_cmd->add_option("--k", k_k, "Neighbours per point")->required();
  knn_cmd->add_option("--out", k_out, "Edge list output")->required();

  // threshold
  auto* th_cmd = app.add_subcommand("threshold", "Drop low-degree vertices");
  std::string t_graph, t_out, t_map;
  std::size_t t_dmin = 0;
  bool t_iterate = false;
  th_cmd->add_option("--graph", t_graph, "Edge list")->required();
  th_cmd->add_option("--dmin", t_dmin, "Minimum degree to keep")->required();
  th_cmd->add_option("--out", t_out, "Edge list output")->required();
  th_cmd->add_option("--map", t_map, "Kept original ids, one per line (new id = line index)");
  th_cmd->add_flag("--iterate", t_iterate, "Repeat until no vertex falls below the threshold");

  // score
  auto* score_cmd = app.add_subcommand("score", "Compare a cluster or partition against ground truth");
  std::string sc_found, sc_truth;
  score_cmd->add_option("--found", sc_found, "cluster.csv or partition.csv")->required();
  score_cmd->add_option("--truth", sc_truth, "Ground-truth labels")->required();

  // diag
  auto* diag_cmd = app.add_subcommand("diag", "Theory diagnostics");
  diag_cmd->require_subcommand(1);
  std::string d_graph, d_labels, d_support;
  std::size_t d_s = 1, d_trials = 0, d_k = 1, d_pairs = 1000;
  std::uint64_t d_seed = 0;
  vertex_id d_i = 0, d_j = 1;
  double d_P = 0.0, d_Q = 0.0;
  long d_remove = -1;
  auto* d_ric = diag_cmd->add_subcommand("ric", "Restricted isometry constant of the Laplacian");
  d_ric->add_option("--graph", d_graph)->required();
  d_ric->add_option("--s", d_s, "Order");
  d_ric->add_option("--trials", d_trials, "Random subsets (lower bound); 0 = exhaustive");
  d_ric->add_option("--seed", d_seed);
  auto* d_coh = diag_cmd->add_subcommand("coherence", "Coherence of the Laplacian columns");
  d_coh->add_option("--graph", d_graph)->required();
  auto* d_chi = diag_cmd->add_subcommand("chi", "Common-neighbour count of two vertices");
  d_chi->add_option("--graph", d_graph)->required();
  d_chi->add_option("--i", d_i)->required();
  d_chi->add_option("--j", d_j)->required();
  auto* d_reg = diag_cmd->add_subcommand("regime", "Exact-recovery regime for p = P ln n/n, q = Q ln n/n");
  d_reg->add_option("--k", d_k)->required();
  d_reg->add_option("--P", d_P)->required();
  d_reg->add_option("--Q", d_Q)->required();
  auto* d_erc = diag_cmd->add_subcommand("erc", "Exact recovery condition for a column support");
  d_erc->add_option("--graph", d_graph)->required();
  d_erc->add_option("--support", d_support, "Comma-separated column ids")->required();
  d_erc->add_option("--remove-column", d_remove, "Drop this vertex's column first (ids then skip it)");
  auto* d_pert = diag_cmd->add_subcommand("perturbation", "Noise split of the Laplacian against ground truth");
  d_pert->add_option("--graph", d_graph)->required();
  d_pert->add_option("--labels", d_labels)->required();
  auto* d_floor = diag_cmd->add_subcommand("floor", "Sampled in-cluster column inner products");
  d_floor->add_option("--graph", d_graph)->required();
  d_floor->add_option("--labels", d_labels)->required();
  d_floor->add_option("--trials", d_pairs, "Sampled pairs");
  d_floor->add_option("--seed", d_seed);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Seeded experiments");
  bench_cmd->require_subcommand(1);
  std::string b_config, b_out, b_summary;
  std::size_t b_threads = 0;
  bool b_single = false;
  std::vector<CLI::App*> bench_kinds;
  for (const char* name : {"noise-sweep", "scaling", "recovery"}) {
    auto* b = bench_cmd->add_subcommand(name);
    b->add_option("--config", b_config, "Flat key = value experiment spec")->required();
    b->add_option("--out", b_out, "Per-trial CSV")->required();
    b->add_option("--summary", b_summary, "Per-point summary CSV");
    b->add_option("--threads", b_threads, "Worker threads (overrides the spec)");
    b->add_flag("--single-thread", b_single, "Force one worker for clean timings");
    bench_kinds.push_back(b);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SbmParams params{g_n, g_k, g_p, g_q, g_sizes.empty() ? std::vector<std::size_t>{} : parse_sizes(g_sizes)};
      SbmSample s = gen_sbm(params, g_seed, g_permute);
      if (!s.isolated.empty()) {
        std::cerr << "warning: " << s.isolated.size() << " isolated vertices\n";
        if (g_fail_isolated) return 2;
      }
      io::write_edge_list(s.graph, g_out);
      if (!g_labels.empty()) io::write_labels(s.truth, g_labels);
      kv("vertices", s.graph.num_vertices());
      kv("edges", s.graph.num_edges());
      kv("isolated", s.isolated.size());
    } else if (*scp_cmd) {
      LoadedGraph lg = load_graph(s_graph, s_drop);
      LaplacianView lap(lg.graph);
      const vertex_id seed = lg.to_working(s_seed);
      auto run = [&](std::size_t n0) {
        ScpConfig cfg;
        cfg.seed_vertex = seed;
        cfg.n0_hat = n0;
        cfg.omega_factor = s_omega;
        return scp(lap, cfg);
      };
      if (!s_range.empty()) {
        auto f = io::detail::split(s_range, ":");
        std::size_t lo = 0, hi = 0, step = 1;
        if (f.size() < 2 || f.size() > 3 || !io::detail::parse_number(f[0], lo) || !io::detail::parse_number(f[1], hi) ||
            (f.size() == 3 && !io::detail::parse_number(f[2], step)) || step == 0 || lo > hi) {
          throw invalid_input("--n0-range must be lo:hi[:step]");
        }
        auto out = io::detail::open_out(s_out);
        out << "n0_hat,vertex\n";
        for (std::size_t n0 = lo; n0 <= hi; n0 += step) {
          ClusterResult r = run(n0);
          for (vertex_id v : lg.lift(r.cluster)) out << n0 << ',' << v << '\n';
          std::cout << "n0_hat=" << n0 << " size=" << r.cluster.size()
                    << " residual=" << io::detail::format_double(r.sp_result.residual_norm)
                    << " stop=" << to_string(r.sp_result.stop) << '\n';
        }
      } else {
        if (s_n0 == 0) throw invalid_input("scp: give --n0 or --n0-range");
        ClusterResult r = run(s_n0);
        io::write_cluster(lg.lift(r.cluster), s_out);
        kv("size", r.cluster.size());
        kv("omega", r.omega.size());
        kv("lambda", r.lambda_sharp.size());
        kv("omega_clamped", r.omega_clamped);
        kv("empty_sparsity", r.empty_sparsity);
        kv("sp_stop", to_string(r.sp_result.stop));
        kv("sp_iterations", r.sp_result.iterations);
        kv("residual", r.sp_result.residual_norm);
        kv("converged", r.converged());
        kv("seconds", r.threshold_seconds + r.recovery_seconds);
        kv("dropped_isolated", lg.dropped);
      }
    } else if (*iscp_cmd) {
      LoadedGraph lg = load_graph(i_graph, i_drop);
      IscpResult r = iscp(lg.graph, {parse_sizes(i_sizes)}, {i_omega, {}});
      io::write_labels(lift_partition(lg, r.partition, lg.graph.num_vertices() + lg.dropped), i_out);
      kv("clusters", r.partition.num_clusters());
      kv("rounds", r.rounds.size());
      kv("rejected", r.rejected.size() + lg.dropped);
      kv("complete", r.complete);
      if (!r.complete) {
        kv("failed_round", r.failed_round);
        kv("failure", r.failure);
      }
    } else if (*cc_cmd) {
      RectMatrix b = io::read_matrix(c_matrix);
      CoclusterResult r = cocluster(b, c_n0, c_k, c_omega);
      io::write_labels(r.rows, c_rows);
      io::write_labels(r.cols, c_cols);
      kv("row_clusters", r.rows.num_clusters());
      kv("col_clusters", r.cols.num_clusters());
      kv("rejected_rows", r.rejected_rows.size());
      kv("rejected_cols", r.rejected_cols.size());
    } else if (*sc_cmd) {
      LoadedGraph lg = load_graph(sc_graph, sc_drop);
      SpectralResult r = spectral_clustering(lg.graph, sc_k, sc_seed);
      io::write_labels(lift_partition(lg, r.partition, lg.graph.num_vertices() + lg.dropped), sc_out);
      kv("clusters", r.partition.num_clusters());
      kv("zero_rows", r.zero_rows.size());
      kv("seconds", r.seconds);
    } else if (*knn_cmd) {
      SparseGraph g = knn_graph(io::read_points(k_points), k_sigma, k_k);
      io::write_edge_list(g, k_out);
      kv("vertices", g.num_vertices());
      kv("edges", g.num_edges());
    } else if (*th_cmd) {
      SparseGraph g = io::read_edge_list(t_graph);
      DegreeThresholdResult r = degree_threshold(g, t_dmin, t_iterate);
      io::write_edge_list(r.graph, t_out);
      if (!t_map.empty()) io::write_cluster(r.kept, t_map);
      kv("kept", r.kept.size());
      kv("dropped", g.num_vertices() - r.kept.size());
      kv("passes", r.passes);
      kv("second_pass_drops", r.second_pass_drops);
    } else if (*score_cmd) {
      Partition truth = Partition::from_labels(io::read_labels(sc_truth));
      std::ifstream probe(sc_found);
      if (!probe) throw invalid_input("cannot open " + sc_found);
      std::string text((std::istreambuf_iterator<char>(probe)), std::istreambuf_iterator<char>());
      if (text.find(',') != std::string::npos) {
        std::istringstream in(text);
        Partition found = Partition::from_labels(io::read_labels(in, sc_found));
        PartitionAgreement a = partition_accuracy(found, truth);
        kv("accuracy", a.accuracy);
        kv("found_clusters", found.num_clusters());
        kv("truth_clusters", truth.num_clusters());
      } else {
        std::istringstream in(text);
        IndexSet found = io::read_cluster(in, sc_found);
        if (!found.fits(truth.num_vertices())) throw invalid_input("found cluster names vertices outside the truth file");
        std::vector<std::size_t> overlap(truth.num_clusters(), 0);
        for (vertex_id v : found) ++overlap[truth.cluster_of(v)];
        const auto best = static_cast<vertex_id>(std::max_element(overlap.begin(), overlap.end()) - overlap.begin());
        IndexSet target = truth.cluster(best);
        kv("matched_cluster", best);
        kv("misclassification", misclassification(found, target));
        kv("found_size", found.size());
        kv("truth_size", target.size());
        kv("missed", set_difference(target, found).size());
      }
    } else if (*diag_cmd) {
      if (*d_reg) {
        diag::RegimeReport r = diag::recovery_regime(d_k, d_P, d_Q);
        kv("value", r.value);
        kv("solvable_hint", diag::to_string(r.hint));
        return 0;
      }
      SparseGraph g = io::read_edge_list(d_graph);
      if (*d_chi) {
        kv("chi", diag::chi_statistic(g, d_i, d_j));
        return 0;
      }
      if (*d_pert) {
        Partition truth = Partition::from_labels(io::read_labels(d_labels));
        diag::PerturbationReport r = diag::perturbation_split(g, truth);
        kv("e1_inf", r.e1_inf);
        kv("e2_inf", r.e2_inf);
        kv("e1_one", r.e1_one);
        kv("e2_one", r.e2_one);
        kv("r_max", r.r_max);
        kv("r_over_1_plus_r_max", r.r_ratio_max);
        kv("zero_in_degree", r.zero_in_degree);
        return 0;
      }
      LaplacianView lap(g);
      if (*d_ric) {
        diag::RicReport r = d_trials ? diag::ric_sampled(lap, d_s, d_trials, d_seed) : diag::ric_bruteforce(lap, d_s);
        kv("s", r.s);
        kv("delta", r.delta);
        kv("method", diag::to_string(r.method));
        kv("lower_bound_only", r.method == diag::RicMethod::sampled);
        kv("worst_set", join(r.worst_set));
        kv("subsets", r.subsets_evaluated);
      } else if (*d_coh) {
        diag::CoherenceReport r = diag::coherence(lap);
        kv("mu_normalized", r.normalized);
        kv("mu_unnormalized", r.unnormalized);
        kv("normalized_pair", std::to_string(r.normalized_pair[0]) + "," + std::to_string(r.normalized_pair[1]));
        kv("unnormalized_pair", std::to_string(r.unnormalized_pair[0]) + "," + std::to_string(r.unnormalized_pair[1]));
      } else if (*d_erc) {
        std::vector<vertex_id> ids;
        for (std::size_t v : parse_sizes(d_support)) ids.push_back(static_cast<vertex_id>(v));
        IndexSet support = IndexSet::from_unsorted(ids);
        diag::ErcReport r;
        if (d_remove >= 0) {
          const auto skip = static_cast<vertex_id>(d_remove);
          IndexSet ambient = IndexSet::range_without(g.num_vertices(), skip);
          std::vector<vertex_id> local;
          for (vertex_id v : support) {
            const std::size_t pos = ambient.position(v);
            if (pos == ambient.size()) throw invalid_input("support contains the removed column");
            local.push_back(static_cast<vertex_id>(pos));
          }
          ColumnRestriction<LaplacianView> phi(lap, ambient);
          r = diag::erc_check(phi, IndexSet::from_sorted(std::move(local)));
        } else {
          r = diag::erc_check(lap, support);
        }
        kv("erc", r.value);
        kv("holds", r.holds);
        kv("sigma_min", r.sigma_min);
        kv("sigma_max", r.sigma_max);
      } else if (*d_floor) {
        Partition truth = Partition::from_labels(io::read_labels(d_labels));
        diag::InnerProductFloorReport r = diag::intra_inner_product_floor(lap, truth, d_pairs, d_seed);
        kv("pairs", r.pairs);
        kv("min", r.min);
        kv("mean", r.mean);
        kv("alpha", r.alpha);
        kv("n0", r.n0);
        kv("stated_floor", r.stated_floor);
        kv("derived_floor", r.derived_floor);
        kv("fraction_above_stated", r.fraction_above_stated);
        kv("fraction_above_derived", r.fraction_above_derived);
      }
    } else if (*bench_cmd) {
      bench::Config cfg = bench::Config::parse_file(b_config);
      std::string which;
      for (auto* b : bench_kinds) {
        if (*b) which = b->get_name();
      }
      if (which == "recovery") {
        cfg.set_default("kind", "single-cluster");
      } else {
        cfg.set_default("kind", which);
      }
      bench::ExperimentSpec spec = bench::ExperimentSpec::from_config(cfg);
      const bool ok = which == "recovery" ? (spec.kind == bench::Kind::single_cluster ||
                                             spec.kind == bench::Kind::full_partition || spec.kind == bench::Kind::cocluster)
                                          : bench::parse_kind(which) == spec.kind;
      if (!ok) throw invalid_input("bench " + which + ": config kind is " + bench::to_string(spec.kind));
      if (b_threads) spec.threads = b_threads;
      if (b_single) spec.threads = 1;
      auto records = bench::run(spec);
      write_records(records, b_out);
      auto summary = bench::summarize(records);
      if (!b_summary.empty()) {
        auto out = io::detail::open_out(b_summary);
        bench::write_summary_csv(summary, out);
      }
      for (const auto& s : summary) {
        std::cout << "grid=" << s.grid << " algorithm=" << s.algorithm << " n=" << s.n
                  << " Q=" << io::detail::format_double(s.Q)
                  << " mean_misclass=" << io::detail::format_double(s.mean_misclassification)
                  << " exact_fraction=" << io::detail::format_double(s.exact_fraction)
                  << " median_seconds=" << io::detail::format_double(s.median_seconds) << " trials=" << s.trials
                  << " failures=" << s.failures << '\n';
      }
      if (spec.kind == bench::Kind::scaling) {
        for (const std::string& a : spec.algorithms) {
          try {
            kv("slope_" + a, bench::scaling_slope(summary, a));
          } catch (const invalid_input&) {
            kv("slope_" + a, std::string("n/a"));
          }
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
