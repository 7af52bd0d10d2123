#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pursuit/baselines.hpp"
#include "pursuit/cluster_pursuit.hpp"
#include "pursuit/cocluster.hpp"
#include "pursuit/io.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/random_graphs.hpp"

namespace pursuit::bench {

/// Flat `key = value` document: `#` comments, optional quotes around
/// strings, `[a, b, c]` or `a,b,c` lists.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::string_view v = io::detail::trim(line);
      if (v.empty()) continue;
      if (v.front() == '[') continue;  // table headers carry no meaning in a flat document
      const auto eq = v.find('=');
      if (eq == std::string_view::npos) throw io::parse_error(source, no, "expected key = value");
      std::string key(io::detail::trim(v.substr(0, eq)));
      std::string val(io::detail::trim(v.substr(eq + 1)));
      if (val.size() >= 2 && val.front() == '[' && val.back() == ']') val = val.substr(1, val.size() - 2);
      std::erase(val, '"');
      std::erase(val, '\'');
      if (key.empty()) throw io::parse_error(source, no, "empty key");
      if (c.values_.count(key)) throw io::parse_error(source, no, "duplicate key `" + key + "`");
      c.values_[key] = val;
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    auto in = io::detail::open_in(path);
    return parse(in, path);
  }

  static Config from_map(std::map<std::string, std::string> m) {
    Config c;
    c.values_ = std::move(m);
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set_default(const std::string& key, const std::string& value) { values_.emplace(key, value); }

  std::string str(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    used_.push_back(key);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    if (fallback) return *fallback;
    throw invalid_input("config: missing key `" + key + "`");
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key) && fallback) {
      used_.push_back(key);
      return *fallback;
    }
    const std::string s = str(key);
    double v = 0.0;
    if (!io::detail::parse_number(std::string_view(s), v)) throw invalid_input("config: `" + key + "` is not a number: " + s);
    return v;
  }

  std::uint64_t integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) const {
    if (!has(key) && fallback) {
      used_.push_back(key);
      return *fallback;
    }
    const std::string s = str(key);
    std::uint64_t v = 0;
    if (!io::detail::parse_number(std::string_view(s), v)) throw invalid_input("config: `" + key + "` is not a nonnegative integer: " + s);
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) {
      used_.push_back(key);
      return fallback;
    }
    const std::string s = str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw invalid_input("config: `" + key + "` must be true or false");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const std::string text = str(key);
    for (auto f : io::detail::split(text, ", \t")) {
      double v = 0.0;
      if (!io::detail::parse_number(f, v)) throw invalid_input("config: bad entry in `" + key + "`: " + std::string(f));
      out.push_back(v);
    }
    if (out.empty()) throw invalid_input("config: `" + key + "` is empty");
    return out;
  }

  std::vector<std::string> words(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    std::vector<std::string> out;
    const std::string text = str(key, fallback);
    for (auto f : io::detail::split(text, ", \t")) out.emplace_back(f);
    return out;
  }

  /// Keys present in the document that nothing asked for.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) out.push_back(k);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::vector<std::string> used_;
};

enum class Kind { single_cluster, full_partition, noise_sweep, scaling, cocluster };

inline Kind parse_kind(const std::string& s) {
  if (s == "single-cluster") return Kind::single_cluster;
  if (s == "full-partition") return Kind::full_partition;
  if (s == "noise-sweep") return Kind::noise_sweep;
  if (s == "scaling") return Kind::scaling;
  if (s == "cocluster") return Kind::cocluster;
  throw invalid_input("unknown experiment kind `" + s + "`");
}

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::single_cluster: return "single-cluster";
    case Kind::full_partition: return "full-partition";
    case Kind::noise_sweep: return "noise-sweep";
    case Kind::scaling: return "scaling";
    case Kind::cocluster: return "cocluster";
  }
  return "?";
}

/// An edge probability either fixed or scaled with n: c ln(n)/sqrt(n) or
/// c ln(n)/n.
struct ProbabilityRule {
  enum class Form { fixed, log_over_sqrt, log_over_n } form = Form::fixed;
  double value = 0.0;

  double at(std::size_t n) const {
    const double dn = static_cast<double>(n);
    switch (form) {
      case Form::fixed: return value;
      case Form::log_over_sqrt: return value * std::log(dn) / std::sqrt(dn);
      case Form::log_over_n: return value * std::log(dn) / dn;
    }
    return value;
  }

  /// Reads `<name>` (fixed), `<name>_log_sqrt` or `<name>_log_n`.
  static ProbabilityRule read(const Config& c, const std::string& name, std::optional<double> fallback = std::nullopt) {
    ProbabilityRule r;
    const int set = c.has(name) + c.has(name + "_log_sqrt") + c.has(name + "_log_n");
    if (set > 1) throw invalid_input("config: give only one of `" + name + "`, `" + name + "_log_sqrt`, `" + name + "_log_n`");
    if (c.has(name + "_log_sqrt")) {
      r.form = Form::log_over_sqrt;
      r.value = c.number(name + "_log_sqrt");
    } else if (c.has(name + "_log_n")) {
      r.form = Form::log_over_n;
      r.value = c.number(name + "_log_n");
    } else {
      r.value = c.number(name, fallback);
    }
    return r;
  }
};

struct ExperimentSpec {
  Kind kind = Kind::single_cluster;
  std::size_t n = 0;
  std::size_t k = 1;
  ProbabilityRule p;
  ProbabilityRule q;
  /// Explicit unequal block sizes for single-cluster / full-partition runs.
  std::vector<std::size_t> sizes;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::string> algorithms;
  /// Size estimate handed to SCP; 0 means the true block size.
  std::size_t n0_hat = 0;
  double omega_factor = 10.0 / 9.0;
  bool permute = true;
  std::size_t threads = 1;

  /// noise-sweep: q = Q / (n - n/k) for each Q.
  std::vector<double> q_grid;
  /// scaling: either fixed n0 with a k grid, or fixed k with an n grid.
  std::size_t n0 = 0;
  std::vector<std::size_t> k_grid;
  std::vector<std::size_t> n_grid;
  std::size_t sc_max_n = kSpectralMaxVertices;
  /// Trials for SC per grid point (0 = same as trials); SC is slow.
  std::size_t sc_trials = 0;

  /// cocluster
  std::size_t rows = 0;
  std::size_t cols = 0;
  double p_in = 0.0;
  double p_out = 0.0;

  static ExperimentSpec from_config(const Config& c) {
    ExperimentSpec s;
    s.kind = parse_kind(c.str("kind"));
    s.trials = c.integer("trials", 1);
    s.master_seed = c.integer("master_seed", 0);
    s.omega_factor = c.number("omega_factor", 10.0 / 9.0);
    s.permute = c.flag("permute", true);
    s.threads = c.integer("threads", 1);
    if (c.flag("single_thread", false)) s.threads = 1;
    s.n0_hat = c.integer("n0_hat", 0);
    auto sizes_of = [&](const std::string& key) {
      std::vector<std::size_t> out;
      for (double v : c.numbers(key)) {
        if (v < 0 || v != std::floor(v)) throw invalid_input("config: `" + key + "` must hold nonnegative integers");
        out.push_back(static_cast<std::size_t>(v));
      }
      return out;
    };
    switch (s.kind) {
      case Kind::single_cluster:
      case Kind::full_partition:
        s.n = c.integer("n");
        s.k = c.integer("k");
        s.p = ProbabilityRule::read(c, "p");
        s.q = ProbabilityRule::read(c, "q", 0.0);
        if (c.has("sizes")) s.sizes = sizes_of("sizes");
        s.algorithms = c.words("algorithms", s.kind == Kind::single_cluster ? "scp" : "iscp");
        break;
      case Kind::noise_sweep:
        s.n = c.integer("n");
        s.k = c.integer("k");
        s.p = ProbabilityRule::read(c, "p");
        s.q_grid = c.numbers("Q_grid");
        s.algorithms = c.words("algorithms", "scp");
        break;
      case Kind::scaling:
        s.p = ProbabilityRule::read(c, "p");
        s.q = ProbabilityRule::read(c, "q", 0.0);
        if (c.has("n0")) {
          s.n0 = c.integer("n0");
          s.k_grid = sizes_of("k_grid");
        } else {
          s.k = c.integer("k");
          s.n_grid = sizes_of("n_grid");
        }
        s.algorithms = c.words("algorithms", "scp,sc");
        s.sc_max_n = c.integer("sc_max_n", kSpectralMaxVertices);
        s.sc_trials = c.integer("sc_trials", 0);
        break;
      case Kind::cocluster:
        s.rows = c.integer("rows");
        s.cols = c.integer("cols");
        s.k = c.integer("k");
        s.p_in = c.number("p_in");
        s.p_out = c.number("p_out");
        s.algorithms = {"cocluster"};
        break;
    }
    if (auto extra = c.unused(); !extra.empty()) throw invalid_input("config: unknown key `" + extra.front() + "`");
    s.validate();
    return s;
  }

  void validate() const {
    if (trials < 1) throw invalid_input("spec: trials must be >= 1");
    if (threads < 1) throw invalid_input("spec: threads must be >= 1");
    if (kind == Kind::noise_sweep && q_grid.empty()) throw invalid_input("spec: empty Q grid");
    if (kind == Kind::scaling && k_grid.empty() && n_grid.empty()) throw invalid_input("spec: empty scaling grid");
    for (const std::string& a : algorithms) {
      if (a != "scp" && a != "iscp" && a != "sc" && a != "cocluster") throw invalid_input("spec: unknown algorithm `" + a + "`");
    }
    if (algorithms.empty()) throw invalid_input("spec: no algorithms");
  }
};

/// One (grid point, trial, algorithm) outcome. Everything except `seconds`
/// is a pure function of the spec and master seed.
struct ExperimentRecord {
  std::size_t grid = 0;
  std::size_t trial = 0;
  std::string algorithm;
  std::size_t n = 0;
  std::size_t k = 0;
  double p = 0.0;
  double q = 0.0;
  /// Expected out-of-cluster degree q (n - n0).
  double Q = 0.0;
  std::size_t n0 = 0;
  std::uint64_t seed = 0;
  /// Single-cluster runs: |C# \ C| / |C#|; partition runs: 1 - accuracy.
  double misclassification = 0.0;
  double accuracy = 0.0;
  bool exact = false;
  /// SCP only: the true cluster minus the seed lies inside Omega.
  bool omega_covers = false;
  bool success = true;
  double seconds = 0.0;
  std::string note;
};

/// Trial seed: distinct stream per (grid point, trial).
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t grid, std::size_t trial) {
  return derive_seed(derive_seed(master, grid), trial);
}

/// Runs job(i) for i in [0, count) on `threads` workers; each job writes its
/// own slot, so results do not depend on scheduling.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t t = 0; t < std::min(threads, count); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline bool has_algorithm(const ExperimentSpec& s, const std::string& a) {
  return std::find(s.algorithms.begin(), s.algorithms.end(), a) != s.algorithms.end();
}

/// Fills misclassification/accuracy/exact from a partition comparison.
inline void score_partition(ExperimentRecord& r, const Partition& found, const Partition& truth) {
  PartitionAgreement a = partition_accuracy(found, truth);
  r.accuracy = a.accuracy;
  r.misclassification = 1.0 - a.accuracy;
  r.exact = found.num_clusters() == truth.num_clusters() && a.accuracy == 1.0;
}

struct GraphPoint {
  SbmParams params;
  std::size_t n0 = 0;
  double Q = 0.0;
};

/// SCP from vertex 0 against the block containing it.
inline ExperimentRecord run_scp_trial(const SbmSample& sample, std::size_t n0_hat, double omega_factor) {
  ExperimentRecord r;
  r.algorithm = "scp";
  const IndexSet truth = sample.truth.cluster(sample.truth.cluster_of(0));
  try {
    auto t0 = std::chrono::steady_clock::now();
    LaplacianView lap(sample.graph);
    ScpConfig cfg;
    cfg.seed_vertex = 0;
    cfg.n0_hat = n0_hat ? n0_hat : truth.size();
    cfg.omega_factor = omega_factor;
    ClusterResult cr = scp(lap, cfg);
    r.seconds = seconds_since(t0);
    r.misclassification = misclassification(cr.cluster, truth);
    r.accuracy = 1.0 - r.misclassification;
    r.exact = cr.cluster == truth;
    r.omega_covers = includes(cr.omega, set_difference(truth, IndexSet::from_list({0})));
    if (!cr.converged()) r.note = "sp-not-converged";
  } catch (const error& e) {
    r.success = false;
    r.note = e.what();
  }
  return r;
}

inline ExperimentRecord run_iscp_trial(const SbmSample& sample, const std::vector<std::size_t>& schedule,
                                       double omega_factor) {
  ExperimentRecord r;
  r.algorithm = "iscp";
  try {
    auto t0 = std::chrono::steady_clock::now();
    IscpResult res = iscp(sample.graph, {schedule}, {omega_factor, {}});
    r.seconds = seconds_since(t0);
    score_partition(r, res.partition, sample.truth);
    if (!res.complete) {
      r.success = false;
      r.note = "incomplete at round " + std::to_string(res.failed_round);
    } else if (!res.rejected.empty()) {
      r.note = std::to_string(res.rejected.size()) + " rejected";
    }
  } catch (const error& e) {
    r.success = false;
    r.note = e.what();
  }
  return r;
}

inline ExperimentRecord run_sc_trial(const SbmSample& sample, std::size_t k, std::uint64_t seed) {
  ExperimentRecord r;
  r.algorithm = "sc";
  try {
    auto t0 = std::chrono::steady_clock::now();
    SpectralResult res = spectral_clustering(sample.graph, k, seed);
    r.seconds = seconds_since(t0);
    score_partition(r, res.partition, sample.truth);
    if (!res.zero_rows.empty()) r.note = std::to_string(res.zero_rows.size()) + " zero rows";
  } catch (const error& e) {
    r.success = false;
    r.note = e.what();
  }
  return r;
}

/// Runs every (grid point, trial) of a graph experiment.
inline std::vector<ExperimentRecord> run_graph_grid(const ExperimentSpec& spec, const std::vector<GraphPoint>& grid) {
  const std::size_t per_point = spec.trials;
  std::vector<std::vector<ExperimentRecord>> slots(grid.size() * per_point);
  parallel_for(slots.size(), spec.threads, [&](std::size_t job) {
    const std::size_t g = job / per_point, t = job % per_point;
    const GraphPoint& pt = grid[g];
    const std::uint64_t seed = trial_seed(spec.master_seed, g, t);
    auto stamp = [&](ExperimentRecord r) {
      r.grid = g;
      r.trial = t;
      r.n = pt.params.n;
      r.k = pt.params.k;
      r.p = pt.params.p;
      r.q = pt.params.q;
      r.Q = pt.Q;
      r.n0 = pt.n0;
      r.seed = seed;
      return r;
    };
    SbmSample sample;
    try {
      sample = gen_sbm(pt.params, seed, spec.permute);
      if (!sample.isolated.empty()) {
        throw invalid_input("generated graph has " + std::to_string(sample.isolated.size()) + " isolated vertices");
      }
    } catch (const error& e) {
      for (const std::string& a : spec.algorithms) {
        ExperimentRecord r;
        r.algorithm = a;
        r.success = false;
        r.note = std::string("generation: ") + e.what();
        slots[job].push_back(stamp(r));
      }
      return;
    }
    for (const std::string& a : spec.algorithms) {
      if (a == "scp") {
        slots[job].push_back(stamp(run_scp_trial(sample, spec.n0_hat, spec.omega_factor)));
      } else if (a == "iscp") {
        std::vector<std::size_t> schedule = pt.params.block_sizes();
        if (spec.n0_hat) std::fill(schedule.begin(), schedule.end(), spec.n0_hat);
        slots[job].push_back(stamp(run_iscp_trial(sample, schedule, spec.omega_factor)));
      } else if (a == "sc") {
        const std::size_t sc_trials = spec.sc_trials ? spec.sc_trials : spec.trials;
        if (pt.params.n > spec.sc_max_n || t >= sc_trials) {
          ExperimentRecord r;
          r.algorithm = "sc";
          r.success = false;
          r.note = pt.params.n > spec.sc_max_n ? "skipped: n above dense budget" : "skipped: sc_trials";
          slots[job].push_back(stamp(r));
        } else {
          slots[job].push_back(stamp(run_sc_trial(sample, pt.params.k, derive_seed(seed, 1))));
        }
      }
    }
  });
  std::vector<ExperimentRecord> out;
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

inline SbmParams sbm_at(const ExperimentSpec& s, std::size_t n, std::size_t k) {
  SbmParams p;
  p.n = n;
  p.k = k;
  p.p = s.p.at(n);
  p.q = s.q.at(n);
  p.sizes = s.sizes;
  p.validate();
  return p;
}

}  // namespace detail

/// Single-cluster (SCP) or full-partition (ISCP / SC) recovery on one SBM.
inline std::vector<ExperimentRecord> run_recovery(const ExperimentSpec& spec) {
  if (spec.kind != Kind::single_cluster && spec.kind != Kind::full_partition) {
    throw invalid_input("run_recovery: spec kind is " + std::string(to_string(spec.kind)));
  }
  SbmParams params = detail::sbm_at(spec, spec.n, spec.k);
  const std::size_t n0 = params.block_sizes().front();
  const double Q = params.q * static_cast<double>(spec.n - n0);
  return detail::run_graph_grid(spec, {{params, n0, Q}});
}

/// SCP misclassification over a grid of expected out-degrees Q.
inline std::vector<ExperimentRecord> run_noise_sweep(const ExperimentSpec& spec) {
  if (spec.kind != Kind::noise_sweep) throw invalid_input("run_noise_sweep: wrong spec kind");
  if (spec.k < 1 || spec.n % spec.k != 0) throw invalid_input("run_noise_sweep: k must divide n");
  const std::size_t n0 = spec.n / spec.k;
  std::vector<detail::GraphPoint> grid;
  for (double Q : spec.q_grid) {
    SbmParams p{spec.n, spec.k, spec.p.at(spec.n), Q / static_cast<double>(spec.n - n0), {}};
    p.validate();
    grid.push_back({p, n0, Q});
  }
  return detail::run_graph_grid(spec, grid);
}

/// Wall time per algorithm over a grid of graph sizes.
inline std::vector<ExperimentRecord> run_scaling(const ExperimentSpec& spec) {
  if (spec.kind != Kind::scaling) throw invalid_input("run_scaling: wrong spec kind");
  std::vector<detail::GraphPoint> grid;
  if (spec.n0) {
    for (std::size_t k : spec.k_grid) {
      SbmParams p = detail::sbm_at(spec, spec.n0 * k, k);
      grid.push_back({p, spec.n0, p.q * static_cast<double>(p.n - spec.n0)});
    }
  } else {
    for (std::size_t n : spec.n_grid) {
      SbmParams p = detail::sbm_at(spec, n, spec.k);
      const std::size_t n0 = n / spec.k;
      grid.push_back({p, n0, p.q * static_cast<double>(n - n0)});
    }
  }
  return detail::run_graph_grid(spec, grid);
}

/// Planted-block co-clustering of a permuted binary matrix.
inline std::vector<ExperimentRecord> run_cocluster(const ExperimentSpec& spec) {
  if (spec.kind != Kind::cocluster) throw invalid_input("run_cocluster: wrong spec kind");
  std::vector<ExperimentRecord> out(spec.trials);
  parallel_for(spec.trials, spec.threads, [&](std::size_t t) {
    ExperimentRecord& r = out[t];
    r.trial = t;
    r.algorithm = "cocluster";
    r.n = spec.rows;
    r.k = spec.k;
    r.p = spec.p_in;
    r.q = spec.p_out;
    r.n0 = spec.k ? spec.rows / spec.k : 0;
    r.seed = trial_seed(spec.master_seed, 0, t);
    try {
      BlockMatrixSample s = gen_block_matrix(spec.rows, spec.cols, spec.k, spec.p_in, spec.p_out, r.seed, spec.permute);
      auto t0 = std::chrono::steady_clock::now();
      CoclusterResult res = cocluster(s.matrix, spec.n0_hat ? spec.n0_hat : r.n0, spec.k, spec.omega_factor);
      r.seconds = detail::seconds_since(t0);
      PartitionAgreement ra = partition_accuracy(res.rows, s.row_truth);
      PartitionAgreement ca = partition_accuracy(res.cols, s.col_truth);
      r.accuracy = std::min(ra.accuracy, ca.accuracy);
      r.misclassification = 1.0 - r.accuracy;
      r.exact = res.rows.num_clusters() == spec.k && res.cols.num_clusters() == spec.k && ra.accuracy == 1.0 &&
                ca.accuracy == 1.0;
      r.note = "rows=" + io::detail::format_double(ra.accuracy) + " cols=" + io::detail::format_double(ca.accuracy);
    } catch (const error& e) {
      r.success = false;
      r.note = e.what();
    }
  });
  return out;
}

inline std::vector<ExperimentRecord> run(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case Kind::single_cluster:
    case Kind::full_partition: return run_recovery(spec);
    case Kind::noise_sweep: return run_noise_sweep(spec);
    case Kind::scaling: return run_scaling(spec);
    case Kind::cocluster: return run_cocluster(spec);
  }
  return {};
}

inline const char* kCsvHeader =
    "grid,trial,algorithm,n,k,p,q,Q,n0,seed,misclassification,accuracy,exact,omega_covers,success,seconds,note";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

/// Records in the order given (grid order, then trial, then algorithm).
inline void write_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  using io::detail::format_double;
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.grid << ',' << r.trial << ',' << r.algorithm << ',' << r.n << ',' << r.k << ',' << format_double(r.p) << ','
        << format_double(r.q) << ',' << format_double(r.Q) << ',' << r.n0 << ',' << r.seed << ','
        << format_double(r.misclassification) << ',' << format_double(r.accuracy) << ',' << r.exact << ','
        << r.omega_covers << ',' << r.success << ',' << format_double(r.seconds) << ',' << csv_escape(r.note) << '\n';
  }
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct PointSummary {
  std::size_t grid = 0;
  std::string algorithm;
  std::size_t n = 0;
  double Q = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double mean_misclassification = 0.0;
  double std_misclassification = 0.0;
  double exact_fraction = 0.0;
  double median_seconds = 0.0;
};

/// Per (grid point, algorithm) aggregates over successful trials; skipped or
/// failed trials count as failures.
inline std::vector<PointSummary> summarize(const std::vector<ExperimentRecord>& records) {
  std::vector<PointSummary> out;
  std::map<std::pair<std::size_t, std::string>, std::size_t> index;
  std::vector<std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) {
    auto key = std::make_pair(r.grid, r.algorithm);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.emplace_back();
      PointSummary s;
      s.grid = r.grid;
      s.algorithm = r.algorithm;
      s.n = r.n;
      s.Q = r.Q;
      out.push_back(s);
    }
    groups[it->second].push_back(&r);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    PointSummary& s = out[g];
    std::vector<double> mis, secs;
    std::size_t exact = 0;
    for (const auto* r : groups[g]) {
      if (!r->success) {
        ++s.failures;
        continue;
      }
      mis.push_back(r->misclassification);
      secs.push_back(r->seconds);
      exact += r->exact;
    }
    s.trials = mis.size();
    if (!mis.empty()) {
      double sum = 0.0;
      for (double m : mis) sum += m;
      s.mean_misclassification = sum / static_cast<double>(mis.size());
      double var = 0.0;
      for (double m : mis) var += (m - s.mean_misclassification) * (m - s.mean_misclassification);
      s.std_misclassification = mis.size() > 1 ? std::sqrt(var / static_cast<double>(mis.size() - 1)) : 0.0;
      s.exact_fraction = static_cast<double>(exact) / static_cast<double>(mis.size());
      s.median_seconds = median(secs);
    }
  }
  return out;
}

inline void write_summary_csv(const std::vector<PointSummary>& rows, std::ostream& out) {
  using io::detail::format_double;
  out << "grid,algorithm,n,Q,mean_misclass,std,exact_fraction,median_seconds,trials,failures\n";
  for (const auto& s : rows) {
    out << s.grid << ',' << s.algorithm << ',' << s.n << ',' << format_double(s.Q) << ','
        << format_double(s.mean_misclassification) << ',' << format_double(s.std_misclassification) << ','
        << format_double(s.exact_fraction) << ',' << format_double(s.median_seconds) << ',' << s.trials << ','
        << s.failures << '\n';
  }
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw invalid_input("loglog_slope: need at least two matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw invalid_input("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw invalid_input("loglog_slope: all x equal");
  return sxy / sxx;
}

/// Slope of median time vs n for one algorithm, over grid points where it ran.
inline double scaling_slope(const std::vector<PointSummary>& rows, const std::string& algorithm) {
  std::vector<double> x, y;
  for (const auto& s : rows) {
    if (s.algorithm == algorithm && s.trials > 0) {
      x.push_back(static_cast<double>(s.n));
      y.push_back(s.median_seconds);
    }
  }
  return loglog_slope(x, y);
}

}  // namespace pursuit::bench
