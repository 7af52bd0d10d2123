#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "pursuit/linalg.hpp"
#include "pursuit/operator.hpp"

namespace pursuit {

/// Indices of the s largest |v_i|; ties go to the smaller index. Returns all
/// indices when s >= v.size().
inline IndexSet select_largest(std::span<const double> v, std::size_t s) {
  if (s >= v.size()) return IndexSet::range(v.size());
  std::vector<vertex_id> idx(v.size());
  std::iota(idx.begin(), idx.end(), vertex_id{0});
  auto before = [&](vertex_id a, vertex_id b) {
    const double fa = std::abs(v[a]), fb = std::abs(v[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s), idx.end(), before);
  idx.resize(s);
  return IndexSet::from_unsorted(std::move(idx));
}

/// Keeps the entries on select_largest(v, s) and zeros the rest.
inline std::vector<double> hard_threshold(std::span<const double> v, std::size_t s) {
  std::vector<double> out(v.size(), 0.0);
  for (vertex_id i : select_largest(v, s)) out[i] = v[i];
  return out;
}

// --------------------------------------------------------------------------
// Least squares on a column subset
// --------------------------------------------------------------------------

enum class LsqrStop {
  zero_rhs,          // y = 0, x = 0 is exact
  residual_small,    // ||r|| <= tol (||y|| + ||A|| ||x||)
  normal_small,      // ||A^T r|| <= tol ||A|| ||r||
  max_iterations,
};

struct LsqrResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  LsqrStop stop = LsqrStop::max_iterations;
  /// ||y - A x||, recomputed from x on exit.
  double residual_norm = 0.0;
  bool converged() const { return stop != LsqrStop::max_iterations; }
};

struct LsqrOptions {
  double tol = 1e-10;
  /// 0 means 4 * |cols|.
  std::size_t max_iter = 0;
};

/// LSQR (Paige & Saunders) for min ||Op_cols x - y||_2, touching the operator
/// only through apply / apply_transpose on `cols`.
template <ColumnOperator Op>
LsqrResult lsqr_solve(const Op& op, const IndexSet& cols, std::span<const double> y, LsqrOptions opt = {}) {
  if (cols.empty()) throw invalid_input("lsqr_solve: empty column set");
  if (y.size() != op.rows()) throw invalid_input("lsqr_solve: right-hand side has wrong length");
  if (!linalg::all_finite(y)) throw invalid_input("lsqr_solve: non-finite right-hand side");
  const std::size_t ncols = cols.size();
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : 4 * ncols;

  LsqrResult res;
  res.x.assign(ncols, 0.0);

  std::vector<double> u(y.begin(), y.end());
  double beta = linalg::norm2(u);
  const double bnorm = beta;
  if (beta == 0.0) {
    res.stop = LsqrStop::zero_rhs;
    return res;
  }
  linalg::scale(1.0 / beta, u);
  std::vector<double> v = op.apply_transpose(cols, u);
  if (!linalg::all_finite(v)) throw invalid_input("lsqr_solve: non-finite operator entries");
  double alpha = linalg::norm2(v);
  if (alpha == 0.0) {
    // y is orthogonal to the range; x = 0 is optimal.
    res.stop = LsqrStop::normal_small;
    res.residual_norm = bnorm;
    return res;
  }
  linalg::scale(1.0 / alpha, v);
  std::vector<double> w = v;

  double phibar = beta;
  double rhobar = alpha;
  double anorm2 = alpha * alpha;

  for (std::size_t it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    // Bidiagonalisation step.
    std::vector<double> Av = op.apply(cols, v);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = Av[i] - alpha * u[i];
    beta = linalg::norm2(u);
    if (beta > 0.0) {
      linalg::scale(1.0 / beta, u);
      std::vector<double> Atu = op.apply_transpose(cols, u);
      for (std::size_t j = 0; j < ncols; ++j) v[j] = Atu[j] - beta * v[j];
      alpha = linalg::norm2(v);
      if (alpha > 0.0) linalg::scale(1.0 / alpha, v);
    } else {
      alpha = 0.0;
    }
    anorm2 += alpha * alpha + beta * beta;

    // Plane rotation eliminating beta.
    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho;
    const double s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;

    linalg::axpy(phi / rho, w, res.x);
    for (std::size_t j = 0; j < ncols; ++j) w[j] = v[j] - (theta / rho) * w[j];

    const double anorm = std::sqrt(anorm2);
    const double rnorm = phibar;
    const double arnorm = phibar * alpha * std::abs(c);
    const double xnorm = linalg::norm2(res.x);
    if (rnorm <= opt.tol * (bnorm + anorm * xnorm)) {
      res.stop = LsqrStop::residual_small;
      break;
    }
    if (arnorm <= opt.tol * anorm * rnorm || alpha == 0.0) {
      res.stop = LsqrStop::normal_small;
      break;
    }
  }
  if (res.stop == LsqrStop::max_iterations) res.iterations = max_iter;
  std::vector<double> r = op.apply(cols, res.x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  res.residual_norm = linalg::norm2(r);
  return res;
}

// --------------------------------------------------------------------------
// Greedy recovery
// --------------------------------------------------------------------------

enum class StopReason {
  empty_budget,        // sparsity 0 or y = 0
  sparsity_reached,    // |support| hit the budget
  residual_tolerance,  // ||r|| below tolerance
  stagnation,          // OMP re-selected a support column or the new column is dependent
  no_improvement,      // SP residual stopped decreasing; previous iterate returned
  max_iterations,
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::empty_budget: return "empty_budget";
    case StopReason::sparsity_reached: return "sparsity_reached";
    case StopReason::residual_tolerance: return "residual_tolerance";
    case StopReason::stagnation: return "stagnation";
    case StopReason::no_improvement: return "no_improvement";
    case StopReason::max_iterations: return "max_iterations";
  }
  return "unknown";
}

struct RecoveryResult {
  IndexSet support;
  /// Aligned with support.
  std::vector<double> coefficients;
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  StopReason stop = StopReason::max_iterations;
  /// False if any inner least-squares solve hit its iteration cap.
  bool least_squares_converged = true;
  /// ||r|| after initialisation and after every iteration.
  std::vector<double> residual_history;

  bool converged() const { return stop != StopReason::stagnation && least_squares_converged; }

  /// Dense length-N coefficient vector.
  std::vector<double> dense(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) out[support[k]] = coefficients[k];
    return out;
  }
};

/// min ||Phi x - y||_2 subject to ||x||_0 <= sparsity.
template <ColumnOperator Op>
struct RecoveryProblem {
  const Op& op;
  std::span<const double> target;
  std::size_t sparsity;

  void validate() const {
    if (target.size() != op.rows()) throw invalid_input("RecoveryProblem: target length does not match operator rows");
    if (sparsity > op.cols()) throw invalid_input("RecoveryProblem: sparsity exceeds column count");
    if (!linalg::all_finite(target)) throw invalid_input("RecoveryProblem: non-finite target");
  }
};

namespace detail {

template <ColumnOperator Op>
std::vector<double> residual(const Op& op, const IndexSet& cols, std::span<const double> x, std::span<const double> y) {
  std::vector<double> r(y.begin(), y.end());
  if (cols.empty()) return r;
  std::vector<double> fit = op.apply(cols, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= fit[i];
  return r;
}

inline vertex_id argmax_abs(std::span<const double> v) {
  vertex_id best = 0;
  double bv = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > bv) {
      bv = std::abs(v[i]);
      best = static_cast<vertex_id>(i);
    }
  }
  return best;
}

}  // namespace detail

enum class OmpLeastSquares {
  /// Exact refit through an incrementally updated Cholesky factor of the
  /// support Gram matrix, plus one refinement step.
  cholesky_update,
  /// Fresh LSQR solve on the support every iteration.
  lsqr,
};

struct OmpOptions {
  /// Stop when ||r||_2 < residual_tol (absolute).
  double residual_tol = 1e-8;
  OmpLeastSquares least_squares = OmpLeastSquares::cholesky_update;
  LsqrOptions lsqr{};
  /// Called after every refit with the current support and residual.
  std::function<void(const IndexSet&, std::span<const double>)> on_iteration;
};

/// Orthogonal Matching Pursuit: grow the support by the column most
/// correlated (raw inner product) with the residual, refit on the support,
/// repeat until |support| = sparsity or ||r|| < residual_tol.
template <ColumnOperator Op>
RecoveryResult omp(const RecoveryProblem<Op>& problem, const OmpOptions& opt = {}) {
  problem.validate();
  const Op& op = problem.op;
  std::span<const double> y = problem.target;
  const std::size_t N = op.cols();
  const std::size_t budget = std::min(problem.sparsity, N);
  const IndexSet all = IndexSet::range(N);

  RecoveryResult res;
  std::vector<double> r(y.begin(), y.end());
  double rnorm = linalg::norm2(r);
  res.residual_norm = rnorm;
  res.residual_history.push_back(rnorm);
  if (budget == 0 || rnorm == 0.0) {
    res.stop = rnorm < opt.residual_tol ? StopReason::residual_tolerance : StopReason::empty_budget;
    return res;
  }
  if (rnorm < opt.residual_tol) {
    res.stop = StopReason::residual_tolerance;
    return res;
  }

  std::vector<char> in_support(N, 0);
  std::vector<vertex_id> order;            // support in selection order
  std::vector<SparseVector> columns;       // selected columns, selection order
  std::vector<std::vector<double>> chol;   // lower-triangular rows of the Gram factor
  std::vector<double> rhs;                 // Phi_S^T y, selection order
  std::vector<double> x;                   // coefficients, selection order

  auto cholesky_solve = [&](std::span<const double> b) {
    const std::size_t m = chol.size();
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= chol[i][j] * z[j];
      z[i] = s / chol[i][i];
    }
    for (std::size_t i = m; i-- > 0;) {
      double s = z[i];
      for (std::size_t j = i + 1; j < m; ++j) s -= chol[j][i] * z[j];
      z[i] = s / chol[i][i];
    }
    return z;
  };
  auto support_residual = [&](std::span<const double> coef) {
    std::vector<double> out(y.begin(), y.end());
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const SparseVector& c = columns[k];
      for (std::size_t e = 0; e < c.indices.size(); ++e) out[c.indices[e]] -= coef[k] * c.values[e];
    }
    return out;
  };

  while (true) {
    if (order.size() == budget) {
      res.stop = StopReason::sparsity_reached;
      break;
    }
    std::vector<double> corr = op.apply_transpose(all, r);
    const vertex_id pick = detail::argmax_abs(corr);
    if (in_support[pick] || corr[pick] == 0.0) {
      res.stop = StopReason::stagnation;
      break;
    }

    SparseVector col = op.column(pick);
    if (opt.least_squares == OmpLeastSquares::cholesky_update) {
      std::vector<double> g(order.size());
      for (std::size_t k = 0; k < order.size(); ++k) g[k] = dot(columns[k], col);
      const double gii = dot(col, col);
      std::vector<double> row(order.size() + 1);
      double acc = 0.0;
      for (std::size_t i = 0; i < order.size(); ++i) {
        double s = g[i];
        for (std::size_t j = 0; j < i; ++j) s -= chol[i][j] * row[j];
        row[i] = s / chol[i][i];
        acc += row[i] * row[i];
      }
      const double d2 = gii - acc;
      if (!(d2 > 1e-14 * gii)) {
        res.stop = StopReason::stagnation;
        break;
      }
      row[order.size()] = std::sqrt(d2);
      chol.push_back(std::move(row));
      rhs.push_back(col.dot(y));
    }
    in_support[pick] = 1;
    order.push_back(pick);
    columns.push_back(std::move(col));
    ++res.iterations;

    if (opt.least_squares == OmpLeastSquares::cholesky_update) {
      x = cholesky_solve(rhs);
      r = support_residual(x);
      std::vector<double> corr_s(order.size());
      for (std::size_t k = 0; k < order.size(); ++k) corr_s[k] = columns[k].dot(r);
      std::vector<double> delta = cholesky_solve(corr_s);
      linalg::axpy(1.0, delta, x);
      r = support_residual(x);
    } else {
      IndexSet sorted = IndexSet::from_unsorted(order);
      LsqrResult ls = lsqr_solve(op, sorted, y, opt.lsqr);
      res.least_squares_converged = res.least_squares_converged && ls.converged();
      x.assign(order.size(), 0.0);
      for (std::size_t k = 0; k < order.size(); ++k) x[k] = ls.x[sorted.position(order[k])];
      r = support_residual(x);
    }
    rnorm = linalg::norm2(r);
    res.residual_history.push_back(rnorm);
    if (opt.on_iteration) opt.on_iteration(IndexSet::from_unsorted(order), r);
    if (rnorm < opt.residual_tol) {
      res.stop = StopReason::residual_tolerance;
      break;
    }
  }

  res.support = IndexSet::from_unsorted(order);
  res.coefficients.assign(order.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) res.coefficients[res.support.position(order[k])] = x[k];
  res.residual_norm = rnorm;
  return res;
}

struct SpOptions {
  /// 0 means max(10, ceil(log2 N)).
  std::size_t k_max = 0;
  /// Early exit once ||r|| <= residual_tol * ||y||.
  double residual_tol = 1e-12;
  LsqrOptions lsqr{};
};

inline std::size_t default_sp_iterations(std::size_t n_cols) {
  std::size_t lg = n_cols > 1 ? static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n_cols)))) : 0;
  return std::max<std::size_t>(10, lg);
}

/// Subspace Pursuit: keep an s-column candidate support; each iteration
/// merges in the s columns best correlated with the residual, refits on the
/// merged set, and prunes back to the s largest coefficients. Stops after
/// k_max iterations, when the residual vanishes, or when it fails to
/// decrease (returning the previous iterate).
template <ColumnOperator Op>
RecoveryResult subspace_pursuit(const RecoveryProblem<Op>& problem, const SpOptions& opt = {}) {
  problem.validate();
  const Op& op = problem.op;
  std::span<const double> y = problem.target;
  const std::size_t N = op.cols();
  const std::size_t s = std::min(problem.sparsity, N);
  const std::size_t k_max = opt.k_max ? opt.k_max : default_sp_iterations(N);
  const IndexSet all = IndexSet::range(N);
  const double ynorm = linalg::norm2(y);

  RecoveryResult res;
  if (s == 0) {
    res.residual_norm = ynorm;
    res.residual_history.push_back(ynorm);
    res.stop = StopReason::empty_budget;
    return res;
  }

  // Initialisation.
  IndexSet support = select_largest(op.apply_transpose(all, y), s);
  LsqrResult ls = lsqr_solve(op, support, y, opt.lsqr);
  res.least_squares_converged = ls.converged();
  std::vector<double> coef = std::move(ls.x);
  std::vector<double> r = detail::residual(op, support, coef, y);
  double rnorm = linalg::norm2(r);
  res.residual_history.push_back(rnorm);
  res.stop = StopReason::max_iterations;

  for (std::size_t k = 1; k <= k_max; ++k) {
    if (rnorm <= opt.residual_tol * ynorm) {
      res.stop = StopReason::residual_tolerance;
      break;
    }
    IndexSet merged = set_union(support, select_largest(op.apply_transpose(all, r), s));
    LsqrResult wide = lsqr_solve(op, merged, y, opt.lsqr);
    if (!wide.converged()) res.least_squares_converged = false;
    IndexSet keep_local = select_largest(wide.x, s);
    IndexSet next_support = keep_local.lift(merged);
    std::vector<double> next_coef(keep_local.size());
    for (std::size_t j = 0; j < keep_local.size(); ++j) next_coef[j] = wide.x[keep_local[j]];
    std::vector<double> next_r = detail::residual(op, next_support, next_coef, y);
    const double next_norm = linalg::norm2(next_r);
    res.iterations = k;
    if (next_norm >= rnorm) {
      res.stop = StopReason::no_improvement;
      break;
    }
    support = std::move(next_support);
    coef = std::move(next_coef);
    r = std::move(next_r);
    rnorm = next_norm;
    res.residual_history.push_back(rnorm);
  }
  if (res.stop == StopReason::max_iterations && rnorm <= opt.residual_tol * ynorm) {
    res.stop = StopReason::residual_tolerance;
  }

  res.support = std::move(support);
  res.coefficients = std::move(coef);
  res.residual_norm = rnorm;
  return res;
}

}  // namespace pursuit
