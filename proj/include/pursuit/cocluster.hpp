#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pursuit/cluster_pursuit.hpp"
#include "pursuit/operator.hpp"
#include "pursuit/partition.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

struct MatrixEntry {
  vertex_id row;
  vertex_id col;
  double value;
};

/// Nonnegative sparse n x m matrix kept in both row-major and column-major
/// compressed form.
class RectMatrix {
 public:
  RectMatrix() = default;

  /// Zero-valued entries are dropped; duplicates and negatives are rejected.
  RectMatrix(std::size_t rows, std::size_t cols, std::vector<MatrixEntry> entries) : rows_(rows), cols_(cols) {
    std::erase_if(entries, [](const MatrixEntry& e) { return e.value == 0.0; });
    for (const MatrixEntry& e : entries) {
      if (e.row >= rows || e.col >= cols) throw invalid_input("RectMatrix: entry out of range");
      if (!(e.value > 0.0) || !std::isfinite(e.value)) throw invalid_input("RectMatrix: entries must be finite and >= 0");
    }
    auto by_row = [](const MatrixEntry& a, const MatrixEntry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; };
    std::sort(entries.begin(), entries.end(), by_row);
    for (std::size_t k = 1; k < entries.size(); ++k) {
      if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
        throw invalid_input("RectMatrix: duplicate entry (" + std::to_string(entries[k].row) + "," +
                            std::to_string(entries[k].col) + ")");
      }
    }
    row_offsets_.assign(rows + 1, 0);
    col_offsets_.assign(cols + 1, 0);
    for (const MatrixEntry& e : entries) {
      row_offsets_[e.row + 1]++;
      col_offsets_[e.col + 1]++;
    }
    for (std::size_t i = 0; i < rows; ++i) row_offsets_[i + 1] += row_offsets_[i];
    for (std::size_t j = 0; j < cols; ++j) col_offsets_[j + 1] += col_offsets_[j];
    row_cols_.resize(entries.size());
    row_vals_.resize(entries.size());
    col_rows_.resize(entries.size());
    col_vals_.resize(entries.size());
    std::vector<std::size_t> fill(col_offsets_.begin(), col_offsets_.end() - 1);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      row_cols_[k] = entries[k].col;
      row_vals_[k] = entries[k].value;
      std::size_t slot = fill[entries[k].col]++;
      col_rows_[slot] = entries[k].row;
      col_vals_[slot] = entries[k].value;
    }
    row_sums_.assign(rows, 0.0);
    col_sums_.assign(cols, 0.0);
    for (const MatrixEntry& e : entries) {
      row_sums_[e.row] += e.value;
      col_sums_[e.col] += e.value;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return row_cols_.size(); }

  std::span<const vertex_id> row_indices(vertex_id i) const {
    return {row_cols_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(vertex_id i) const {
    return {row_vals_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const vertex_id> col_indices(vertex_id j) const {
    return {col_rows_.data() + col_offsets_[j], col_offsets_[j + 1] - col_offsets_[j]};
  }
  std::span<const double> col_values(vertex_id j) const {
    return {col_vals_.data() + col_offsets_[j], col_offsets_[j + 1] - col_offsets_[j]};
  }
  double row_sum(vertex_id i) const { return row_sums_[i]; }
  double col_sum(vertex_id j) const { return col_sums_[j]; }

  std::vector<MatrixEntry> entries() const {
    std::vector<MatrixEntry> out;
    out.reserve(nnz());
    for (vertex_id i = 0; i < rows_; ++i) {
      auto c = row_indices(i);
      auto v = row_values(i);
      for (std::size_t e = 0; e < c.size(); ++e) out.push_back({i, c[e], v[e]});
    }
    return out;
  }

  /// Submatrix on the given rows and columns, relabelled in increasing order.
  RectMatrix submatrix(const IndexSet& rows, const IndexSet& cols) const {
    constexpr vertex_id absent = ~vertex_id{0};
    std::vector<vertex_id> cmap(cols_, absent);
    for (std::size_t k = 0; k < cols.size(); ++k) cmap[cols[k]] = static_cast<vertex_id>(k);
    std::vector<MatrixEntry> sub;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      auto c = row_indices(rows[k]);
      auto v = row_values(rows[k]);
      for (std::size_t e = 0; e < c.size(); ++e) {
        if (cmap[c[e]] != absent) sub.push_back({static_cast<vertex_id>(k), cmap[c[e]], v[e]});
      }
    }
    return RectMatrix(rows.size(), cols.size(), std::move(sub));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<vertex_id> row_cols_;
  std::vector<double> row_vals_;
  std::vector<std::size_t> col_offsets_{0};
  std::vector<vertex_id> col_rows_;
  std::vector<double> col_vals_;
  std::vector<double> row_sums_;
  std::vector<double> col_sums_;
};

/// Implicit bipartite Laplacian L = I - Dx^{-1} B Dy^{-1} B^T on the rows of
/// B, where Dx / Dy hold the row / column sums. It is the random-walk
/// Laplacian of the row graph W = B Dy^{-1} B^T (whose degrees are Dx), and
/// is applied as two sparse rectangular products plus diagonal scalings.
class BipartiteLaplacianView {
 public:
  explicit BipartiteLaplacianView(const RectMatrix& b) : b_(&b) {
    for (vertex_id i = 0; i < b.rows(); ++i) {
      if (!(b.row_sum(i) > 0.0)) throw invalid_input("BipartiteLaplacianView: row " + std::to_string(i) + " is zero");
    }
    for (vertex_id j = 0; j < b.cols(); ++j) {
      if (!(b.col_sum(j) > 0.0)) throw invalid_input("BipartiteLaplacianView: column " + std::to_string(j) + " is zero");
    }
  }

  std::size_t rows() const { return b_->rows(); }
  std::size_t cols() const { return b_->rows(); }
  const RectMatrix& matrix() const { return *b_; }

  /// L_cols x = x scattered onto cols, minus Dx^{-1} B Dy^{-1} B^T of the same.
  std::vector<double> apply(const IndexSet& cols, std::span<const double> x) const {
    detail::check_apply_args(this->cols(), cols, x.size(), "BipartiteLaplacianView::apply");
    std::vector<double> t(b_->cols(), 0.0);  // B^T z
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (x[k] == 0.0) continue;
      auto c = b_->row_indices(cols[k]);
      auto v = b_->row_values(cols[k]);
      for (std::size_t e = 0; e < c.size(); ++e) t[c[e]] += v[e] * x[k];
    }
    std::vector<double> out(rows(), 0.0);
    for (vertex_id j = 0; j < b_->cols(); ++j) {
      if (t[j] == 0.0) continue;
      const double tj = t[j] / b_->col_sum(j);
      auto r = b_->col_indices(j);
      auto v = b_->col_values(j);
      for (std::size_t e = 0; e < r.size(); ++e) out[r[e]] -= v[e] * tj;
    }
    for (vertex_id i = 0; i < rows(); ++i) out[i] /= b_->row_sum(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out[cols[k]] += x[k];
    return out;
  }

  /// [<l_j, r>] for j in cols. W is symmetric, so L^T r = r - W Dx^{-1} r.
  std::vector<double> apply_transpose(const IndexSet& cols, std::span<const double> r) const {
    detail::check_transpose_args(rows(), this->cols(), cols, r.size(), "BipartiteLaplacianView::apply_transpose");
    std::vector<double> t(b_->cols(), 0.0);  // Dy^{-1} B^T Dx^{-1} r
    for (vertex_id j = 0; j < b_->cols(); ++j) {
      auto rr = b_->col_indices(j);
      auto v = b_->col_values(j);
      double s = 0.0;
      for (std::size_t e = 0; e < rr.size(); ++e) s += v[e] * r[rr[e]] / b_->row_sum(rr[e]);
      t[j] = s / b_->col_sum(j);
    }
    std::vector<double> out(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto c = b_->row_indices(cols[k]);
      auto v = b_->row_values(cols[k]);
      double s = 0.0;
      for (std::size_t e = 0; e < c.size(); ++e) s += v[e] * t[c[e]];
      out[k] = r[cols[k]] - s;
    }
    return out;
  }

  SparseVector column(vertex_id i) const {
    std::vector<double> e(1, 1.0);
    std::vector<double> dense = apply(IndexSet::from_list({i}), e);
    SparseVector out{rows(), {}, {}};
    for (vertex_id k = 0; k < dense.size(); ++k) {
      if (dense[k] != 0.0) {
        out.indices.push_back(k);
        out.values.push_back(dense[k]);
      }
    }
    return out;
  }

 private:
  const RectMatrix* b_;
};

static_assert(ColumnOperator<BipartiteLaplacianView>);

struct BlockMatrixSample {
  RectMatrix matrix;
  Partition row_truth;
  Partition col_truth;
};

/// Binary n x m matrix with k planted diagonal blocks (contiguous, sizes
/// n/k x m/k): entries inside a block are 1 with probability p_in, outside
/// with probability p_out. With `permute`, rows and columns are shuffled by
/// independent seeded permutations.
inline BlockMatrixSample gen_block_matrix(std::size_t n, std::size_t m, std::size_t k, double p_in, double p_out,
                                          std::uint64_t seed, bool permute = false) {
  if (k == 0 || n % k != 0 || m % k != 0) throw invalid_input("gen_block_matrix: k must divide both dimensions");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw invalid_input("gen_block_matrix: probabilities must lie in [0,1]");
  }
  const std::size_t rb = n / k, cb = m / k;
  Rng rng(seed);
  std::vector<MatrixEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = (i / rb == j / cb) ? p_in : p_out;
      if (p > 0.0 && rng.bernoulli(p)) entries.push_back({static_cast<vertex_id>(i), static_cast<vertex_id>(j), 1.0});
    }
  }
  std::vector<vertex_id> rl(n), cl(m);
  for (std::size_t i = 0; i < n; ++i) rl[i] = static_cast<vertex_id>(i / rb);
  for (std::size_t j = 0; j < m; ++j) cl[j] = static_cast<vertex_id>(j / cb);
  if (permute) {
    auto rp = rng.permutation(n);
    auto cp = rng.permutation(m);
    for (MatrixEntry& e : entries) {
      e.row = rp[e.row];
      e.col = cp[e.col];
    }
    std::vector<vertex_id> rl2(n), cl2(m);
    for (std::size_t i = 0; i < n; ++i) rl2[rp[i]] = rl[i];
    for (std::size_t j = 0; j < m; ++j) cl2[cp[j]] = cl[j];
    rl = std::move(rl2);
    cl = std::move(cl2);
  }
  return {RectMatrix(n, m, std::move(entries)), Partition(std::move(rl), k), Partition(std::move(cl), k)};
}

struct CoclusterResult {
  Partition rows;
  Partition cols;
  /// Rows / columns that lost all their mass when earlier blocks were removed.
  IndexSet rejected_rows;
  IndexSet rejected_cols;
  std::vector<ClusterResult> rounds;
};

/// Co-clusters the rows and columns of B into k blocks by iterating SCP on the
/// bipartite Laplacian of the rows still unassigned. Each round's columns are
/// the unassigned columns j with (Dy^{-1} B^T 1_X)_j > 1/2, computed on the
/// current submatrix. After k-1 rounds the leftovers form the last block.
/// Rejected rows / columns (if any) get one extra label of their own.
inline CoclusterResult cocluster(const RectMatrix& b, std::size_t n0x_hat, std::size_t k,
                                 double omega_factor = 10.0 / 9.0, SpOptions sp = {}) {
  if (k == 0) throw invalid_input("cocluster: k must be positive");
  BipartiteLaplacianView check(b);  // rejects zero rows / columns up front
  (void)check;

  constexpr vertex_id unassigned = ~vertex_id{0};
  constexpr vertex_id reject_mark = unassigned - 1;
  std::vector<vertex_id> rlab(b.rows(), unassigned), clab(b.cols(), unassigned);
  CoclusterResult out;

  auto open = [](const std::vector<vertex_id>& lab) {
    std::vector<vertex_id> r;
    for (vertex_id v = 0; v < lab.size(); ++v) {
      if (lab[v] == unassigned) r.push_back(v);
    }
    return IndexSet::from_sorted(std::move(r));
  };
  // Rejects rows / columns of the open submatrix that carry no mass, until
  // none are left.
  auto prune = [&]() {
    while (true) {
      IndexSet rs = open(rlab), cs = open(clab);
      if (rs.empty() || cs.empty()) return;
      RectMatrix sub = b.submatrix(rs, cs);
      bool changed = false;
      for (vertex_id i = 0; i < sub.rows(); ++i) {
        if (sub.row_sum(i) == 0.0) {
          rlab[rs[i]] = reject_mark;
          changed = true;
        }
      }
      for (vertex_id j = 0; j < sub.cols(); ++j) {
        if (sub.col_sum(j) == 0.0) {
          clab[cs[j]] = reject_mark;
          changed = true;
        }
      }
      if (!changed) return;
    }
  };

  vertex_id next = 0;
  for (std::size_t round = 0; round + 1 < k; ++round) {
    prune();
    IndexSet rs = open(rlab), cs = open(clab);
    if (rs.size() < 2 || cs.empty()) break;
    RectMatrix sub = b.submatrix(rs, cs);
    BipartiteLaplacianView lap(sub);
    ScpConfig cfg;
    cfg.seed_vertex = 0;
    cfg.n0_hat = std::min(std::max<std::size_t>(n0x_hat, 2), rs.size());
    cfg.omega_factor = omega_factor;
    cfg.sp = sp;
    ClusterResult cr = scp(lap, cfg);

    std::vector<double> mass(sub.cols(), 0.0);
    for (vertex_id local : cr.cluster) {
      auto c = sub.row_indices(local);
      auto v = sub.row_values(local);
      for (std::size_t e = 0; e < c.size(); ++e) mass[c[e]] += v[e];
    }
    for (vertex_id local : cr.cluster) rlab[rs[local]] = next;
    for (vertex_id j = 0; j < sub.cols(); ++j) {
      if (mass[j] / sub.col_sum(j) > 0.5) clab[cs[j]] = next;
    }
    ++next;
    out.rounds.push_back(std::move(cr));
  }
  prune();
  IndexSet rs = open(rlab), cs = open(clab);
  const bool rest_rows = !rs.empty(), rest_cols = !cs.empty();
  for (vertex_id i : rs) rlab[i] = next;
  for (vertex_id j : cs) clab[j] = next;

  auto finish = [&](std::vector<vertex_id>& lab, bool has_rest, IndexSet& rejected) {
    vertex_id count = next + (has_rest ? 1 : 0);
    std::vector<vertex_id> rej;
    for (vertex_id v = 0; v < lab.size(); ++v) {
      if (lab[v] == reject_mark) rej.push_back(v);
    }
    if (!rej.empty()) {
      for (vertex_id v : rej) lab[v] = count;
      ++count;
    }
    rejected = IndexSet::from_sorted(std::move(rej));
    return Partition::from_labels(lab);
  };
  out.rows = finish(rlab, rest_rows, out.rejected_rows);
  out.cols = finish(clab, rest_cols, out.rejected_cols);
  return out;
}

}  // namespace pursuit
