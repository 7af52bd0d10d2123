#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/points.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

struct KMeansConfig {
  std::size_t k = 2;
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<vertex_id> labels;
  /// k x d, row-major.
  std::vector<double> centroids;
  double wcss = 0.0;
  std::size_t iterations = 0;
  /// WCSS after each Lloyd step of the returned restart.
  std::vector<double> wcss_history;
  std::size_t empty_reseeds = 0;
};

namespace detail {

inline std::vector<double> kmeanspp_init(const PointCloud& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.size(), d = pts.dim();
  std::vector<double> c(k * d);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) {
      double total = 0.0;
      for (double v : dist) total += v;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          if (u < dist[i]) {
            pick = i;
            break;
          }
          u -= dist[i];
        }
      } else {
        pick = rng.below(n);
      }
    }
    auto p = pts.row(pick);
    std::copy(p.begin(), p.end(), c.begin() + static_cast<std::ptrdiff_t>(j * d));
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], squared_distance(pts.row(i), p));
  }
  return c;
}

/// Assigns each point to its nearest centroid (lower index on ties); returns
/// the number of changed labels and fills per-point squared distances.
inline std::size_t assign(const PointCloud& pts, const std::vector<double>& c, std::size_t k,
                          std::vector<vertex_id>& labels, std::vector<double>& dist) {
  const std::size_t d = pts.dim();
  std::size_t changed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    vertex_id best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double v = squared_distance(pts.row(i), {c.data() + j * d, d});
      if (v < bd) {
        bd = v;
        best = static_cast<vertex_id>(j);
      }
    }
    if (labels[i] != best) ++changed;
    labels[i] = best;
    dist[i] = bd;
  }
  return changed;
}

inline KMeansResult lloyd(const PointCloud& pts, std::vector<double> c, std::size_t k, std::size_t max_iter) {
  const std::size_t n = pts.size(), d = pts.dim();
  KMeansResult r;
  r.labels.assign(n, ~vertex_id{0});
  std::vector<double> dist(n);
  assign(pts, c, k, r.labels, dist);
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    std::vector<std::size_t> count(k, 0);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = pts.row(i);
      ++count[r.labels[i]];
      for (std::size_t t = 0; t < d; ++t) c[r.labels[i] * d + t] += p[t];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] == 0) {
        // Re-seed from the point farthest from its own centroid.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (dist[i] > dist[far] && count[r.labels[i]] > 1) far = i;
        }
        if (count[r.labels[far]] <= 1) {
          for (std::size_t i = 0; i < n; ++i) {
            if (count[r.labels[i]] > 1) {
              far = i;
              break;
            }
          }
        }
        auto p = pts.row(far);
        const vertex_id old = r.labels[far];
        for (std::size_t t = 0; t < d; ++t) c[old * d + t] -= p[t];
        --count[old];
        std::copy(p.begin(), p.end(), c.begin() + static_cast<std::ptrdiff_t>(j * d));
        count[j] = 1;
        r.labels[far] = static_cast<vertex_id>(j);
        dist[far] = 0.0;
        ++r.empty_reseeds;
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t t = 0; t < d; ++t) c[j * d + t] /= static_cast<double>(count[j]);
    }
    const std::size_t changed = assign(pts, c, k, r.labels, dist);
    double w = 0.0;
    for (double v : dist) w += v;
    r.wcss_history.push_back(w);
    if (changed == 0) {
      ++r.iterations;
      break;
    }
  }
  r.centroids = std::move(c);
  r.wcss = 0.0;
  for (double v : dist) r.wcss += v;
  return r;
}

}  // namespace detail

/// k-means++ seeding followed by Lloyd iterations to an assignment fixpoint;
/// the restart with the lowest within-cluster sum of squares wins (earliest on
/// ties).
inline KMeansResult kmeans(const PointCloud& pts, const KMeansConfig& cfg) {
  if (cfg.k < 1) throw invalid_input("kmeans: k must be >= 1");
  if (cfg.max_iter < 1) throw invalid_input("kmeans: max_iter must be >= 1");
  if (pts.size() < cfg.k) {
    throw invalid_input("kmeans: " + std::to_string(pts.size()) + " points for k=" + std::to_string(cfg.k));
  }
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(cfg.restarts, 1); ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    KMeansResult cur = detail::lloyd(pts, detail::kmeanspp_init(pts, cfg.k, rng), cfg.k, cfg.max_iter);
    if (!have || cur.wcss < best.wcss) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

/// Eigenpairs of a symmetric tridiagonal matrix (diagonal a, off-diagonal b).
class TridiagonalEigen {
 public:
  TridiagonalEigen(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty() || b_.size() + 1 != a_.size()) throw invalid_input("TridiagonalEigen: bad dimensions");
    lo_ = std::numeric_limits<double>::infinity();
    hi_ = -lo_;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const double r = (i > 0 ? std::abs(b_[i - 1]) : 0.0) + (i < b_.size() ? std::abs(b_[i]) : 0.0);
      lo_ = std::min(lo_, a_[i] - r);
      hi_ = std::max(hi_, a_[i] + r);
    }
    scale_ = std::max({std::abs(lo_), std::abs(hi_), std::numeric_limits<double>::min()});
  }

  std::size_t size() const { return a_.size(); }

  /// Number of eigenvalues strictly below x (Sturm sequence).
  std::size_t count_below(double x) const {
    const double tiny = std::numeric_limits<double>::epsilon() * scale_;
    std::size_t neg = 0;
    double q = a_[0] - x;
    for (std::size_t i = 0;; ++i) {
      if (q == 0.0) q = -tiny;
      if (q < 0.0) ++neg;
      if (i + 1 == a_.size()) break;
      q = a_[i + 1] - x - b_[i] * b_[i] / q;
    }
    return neg;
  }

  /// The m-th smallest eigenvalue (0-based) by bisection.
  double eigenvalue(std::size_t m) const {
    double lo = lo_, hi = hi_;
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * scale_;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) > m) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  /// Unit eigenvector for eigenvalue `lambda` by inverse iteration, kept
  /// orthogonal to `previous` (eigenvectors of nearby eigenvalues).
  std::vector<double> eigenvector(double lambda, const std::vector<std::vector<double>>& previous, Rng& rng,
                                  int iterations = 4) const {
    const std::size_t n = a_.size();
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    orthonormalize(x, previous);
    for (int it = 0; it < iterations; ++it) {
      x = solve_shifted(lambda, x);
      orthonormalize(x, previous);
    }
    return x;
  }

  /// ||T x - lambda x||_2.
  double residual(double lambda, const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      double t = (a_[i] - lambda) * x[i];
      if (i > 0) t += b_[i - 1] * x[i - 1];
      if (i < b_.size()) t += b_[i] * x[i + 1];
      s += t * t;
    }
    return std::sqrt(s);
  }

  double scale() const { return scale_; }

 private:
  static void orthonormalize(std::vector<double>& x, const std::vector<std::vector<double>>& previous) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& p : previous) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d += p[i] * x[i];
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= d * p[i];
      }
    }
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      x.assign(x.size(), 0.0);
      x[0] = 1.0;
      return;
    }
    for (double& v : x) v /= nrm;
  }

  /// Solves (T - shift I) x = rhs by Gaussian elimination with partial
  /// pivoting; zero pivots are nudged to eps * scale.
  std::vector<double> solve_shifted(double shift, std::vector<double> rhs) const {
    const std::size_t n = a_.size();
    const double tiny = std::numeric_limits<double>::epsilon() * scale_;
    // Row i of the upper factor holds u0 (diagonal), u1, u2 (two super-diagonals).
    std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
    double d = a_[0] - shift;
    double e = n > 1 ? b_[0] : 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double sub = b_[i];
      const double next_d = a_[i + 1] - shift;
      const double next_e = i + 1 < b_.size() ? b_[i + 1] : 0.0;
      if (std::abs(d) >= std::abs(sub)) {
        if (d == 0.0) d = tiny;
        const double m = sub / d;
        u0[i] = d;
        u1[i] = e;
        u2[i] = 0.0;
        rhs[i + 1] -= m * rhs[i];
        d = next_d - m * e;
        e = next_e;
      } else {
        const double m = d / sub;
        u0[i] = sub;
        u1[i] = next_d;
        u2[i] = next_e;
        std::swap(rhs[i], rhs[i + 1]);
        rhs[i + 1] -= m * rhs[i];
        const double nd = e - m * next_d;
        const double ne = -m * next_e;
        d = nd;
        e = ne;
      }
    }
    if (d == 0.0) d = tiny;
    u0[n - 1] = d;
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
      double s = rhs[i];
      if (i + 1 < n) s -= u1[i] * x[i + 1];
      if (i + 2 < n) s -= u2[i] * x[i + 2];
      x[i] = s / (u0[i] == 0.0 ? tiny : u0[i]);
    }
    return x;
  }

  std::vector<double> a_, b_;
  double lo_ = 0.0, hi_ = 0.0, scale_ = 1.0;
};

/// Eigenvectors for the k largest eigenvalues of a dense symmetric matrix,
/// as columns ordered by decreasing eigenvalue. The matrix is reduced to
/// tridiagonal form and only the k requested pairs are computed.
inline Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& m, std::size_t k, std::uint64_t seed,
                                        std::vector<double>* eigenvalues = nullptr) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (k < 1 || k > n) throw invalid_input("top_eigenvectors: k out of range");
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(m);
  Eigen::VectorXd diag = tri.diagonal();
  Eigen::VectorXd sub = tri.subDiagonal();
  TridiagonalEigen t(std::vector<double>(diag.data(), diag.data() + diag.size()),
                     std::vector<double>(sub.data(), sub.data() + sub.size()));
  Rng rng(seed);
  std::vector<std::vector<double>> vecs;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  if (eigenvalues) eigenvalues->clear();
  for (std::size_t j = 0; j < k; ++j) {
    const double lambda = t.eigenvalue(n - 1 - j);
    std::vector<double> v = t.eigenvector(lambda, vecs, rng);
    if (t.residual(lambda, v) > 1e-8 * t.scale() * std::sqrt(static_cast<double>(n))) {
      throw error("top_eigenvectors: inverse iteration did not converge for eigenvalue " + std::to_string(lambda));
    }
    for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i];
    vecs.push_back(std::move(v));
    if (eigenvalues) eigenvalues->push_back(lambda);
  }
  return tri.matrixQ() * z;
}

struct SpectralResult {
  Partition partition;
  /// Vertices whose eigenvector row was zero and could not be normalized.
  std::vector<vertex_id> zero_rows;
  std::vector<double> eigenvalues;
  double seconds = 0.0;
};

inline constexpr std::size_t kSpectralMaxVertices = 5000;

/// Spectral clustering: rows of the top-k eigenvectors of D^{-1/2} A D^{-1/2},
/// normalized to unit length, clustered by k-means.
inline SpectralResult spectral_clustering(const SparseGraph& g, std::size_t k, std::uint64_t seed,
                                          std::size_t kmeans_restarts = 10) {
  auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = g.num_vertices();
  if (k < 1 || k > n) throw invalid_input("spectral_clustering: k out of range");
  if (n > kSpectralMaxVertices) throw invalid_input("spectral_clustering: n=" + std::to_string(n) + " exceeds dense budget");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (vertex_id i = 0; i < n; ++i) {
    if (g.degree(i) <= 0.0) throw invalid_input("spectral_clustering: vertex " + std::to_string(i) + " has degree 0");
    auto nb = g.neighbors(i);
    auto w = g.weights(i);
    for (std::size_t e = 0; e < nb.size(); ++e) m(i, nb[e]) = w[e] / std::sqrt(g.degree(i) * g.degree(nb[e]));
  }
  SpectralResult out;
  Eigen::MatrixXd v = top_eigenvectors(m, k, derive_seed(seed, 0), &out.eigenvalues);

  std::vector<double> rows;
  std::vector<vertex_id> kept;
  for (vertex_id i = 0; i < n; ++i) {
    const double nrm = v.row(i).norm();
    if (nrm == 0.0) {
      out.zero_rows.push_back(i);
      continue;
    }
    kept.push_back(i);
    for (std::size_t j = 0; j < k; ++j) rows.push_back(v(i, static_cast<Eigen::Index>(j)) / nrm);
  }
  if (kept.size() < k) throw error("spectral_clustering: fewer nonzero eigenvector rows than clusters");
  PointCloud pts(kept.size(), k, std::move(rows));
  KMeansResult km = kmeans(pts, {k, 300, kmeans_restarts, derive_seed(seed, 1)});

  std::vector<vertex_id> labels(n, 0);
  for (std::size_t i = 0; i < kept.size(); ++i) labels[kept[i]] = km.labels[i];
  // A zero row sits at the origin: nearest centroid by norm.
  for (vertex_id z : out.zero_rows) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += km.centroids[j * k + t] * km.centroids[j * k + t];
      if (s < bd) {
        bd = s;
        best = j;
      }
    }
    labels[z] = static_cast<vertex_id>(best);
  }
  out.partition = Partition::from_labels(labels);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace pursuit
