#pragma once

#include <concepts>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/core.hpp"

namespace pursuit {

/// Sparse vector as parallel (index, value) arrays, indices increasing.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<vertex_id> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }

  double at(vertex_id i) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), i);
    if (it == indices.end() || *it != i) return 0.0;
    return values[static_cast<std::size_t>(it - indices.begin())];
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(dim, 0.0);
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] = values[k];
    return out;
  }

  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * dense[indices[k]];
    return s;
  }
};

/// Sparse-sparse inner product.
inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (b.indices[j] < a.indices[i]) {
      ++j;
    } else {
      s += a.values[i++] * b.values[j++];
    }
  }
  return s;
}

/// A linear map R^cols -> R^rows that the greedy solvers may touch only
/// through column-subset products and single-column access.
///
///   apply(S, x)            = sum_j x[j] * phi_{S[j]}      (length rows())
///   apply_transpose(S, r)  = [<phi_{S[j]}, r>]_j          (length |S|)
///   column(j)              = phi_j
template <class Op>
concept ColumnOperator = requires(const Op& op, const IndexSet& cols, std::span<const double> v, vertex_id j) {
  { op.rows() } -> std::convertible_to<std::size_t>;
  { op.cols() } -> std::convertible_to<std::size_t>;
  { op.apply(cols, v) } -> std::convertible_to<std::vector<double>>;
  { op.apply_transpose(cols, v) } -> std::convertible_to<std::vector<double>>;
  { op.column(j) } -> std::convertible_to<SparseVector>;
};

namespace detail {
inline void check_apply_args(std::size_t ncols, const IndexSet& cols, std::size_t xlen, const char* who) {
  if (!cols.fits(ncols)) throw invalid_input(std::string(who) + ": column index out of range");
  if (xlen != cols.size()) {
    throw invalid_input(std::string(who) + ": coefficient length " + std::to_string(xlen) +
                        " does not match " + std::to_string(cols.size()) + " columns");
  }
}
inline void check_transpose_args(std::size_t nrows, std::size_t ncols, const IndexSet& cols, std::size_t rlen,
                                 const char* who) {
  if (!cols.fits(ncols)) throw invalid_input(std::string(who) + ": column index out of range");
  if (rlen != nrows) {
    throw invalid_input(std::string(who) + ": vector length " + std::to_string(rlen) + " does not match " +
                        std::to_string(nrows) + " rows");
  }
}
}  // namespace detail

/// The column submatrix Op_{ambient}, re-indexed so that local column j is
/// column ambient[j] of the parent. The parent must outlive the view.
template <ColumnOperator Op>
class ColumnRestriction {
 public:
  ColumnRestriction(const Op& parent, IndexSet ambient) : parent_(&parent), ambient_(std::move(ambient)) {
    if (!ambient_.fits(parent.cols())) throw invalid_input("ColumnRestriction: column out of range");
  }

  std::size_t rows() const { return parent_->rows(); }
  std::size_t cols() const { return ambient_.size(); }
  const IndexSet& ambient() const { return ambient_; }

  std::vector<double> apply(const IndexSet& cols, std::span<const double> x) const {
    detail::check_apply_args(this->cols(), cols, x.size(), "apply");
    return parent_->apply(cols.lift(ambient_), x);
  }
  std::vector<double> apply_transpose(const IndexSet& cols, std::span<const double> r) const {
    detail::check_transpose_args(rows(), this->cols(), cols, r.size(), "apply_transpose");
    return parent_->apply_transpose(cols.lift(ambient_), r);
  }
  SparseVector column(vertex_id j) const { return parent_->column(ambient_[j]); }

 private:
  const Op* parent_;
  IndexSet ambient_;
};

/// Dense column-major matrix as a ColumnOperator.
class DenseOperator {
 public:
  DenseOperator(std::size_t rows, std::size_t cols, std::vector<double> column_major)
      : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    if (data_.size() != rows * cols) throw invalid_input("DenseOperator: data size mismatch");
  }

  static DenseOperator identity(std::size_t n) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return DenseOperator(n, n, std::move(d));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  std::span<const double> column_view(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::vector<double> apply(const IndexSet& cols, std::span<const double> x) const {
    detail::check_apply_args(cols_, cols, x.size(), "apply");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double* c = data_.data() + std::size_t{cols[k]} * rows_;
      for (std::size_t i = 0; i < rows_; ++i) out[i] += x[k] * c[i];
    }
    return out;
  }

  std::vector<double> apply_transpose(const IndexSet& cols, std::span<const double> r) const {
    detail::check_transpose_args(rows_, cols_, cols, r.size(), "apply_transpose");
    std::vector<double> out(cols.size(), 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double* c = data_.data() + std::size_t{cols[k]} * rows_;
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += c[i] * r[i];
      out[k] = s;
    }
    return out;
  }

  SparseVector column(vertex_id j) const {
    SparseVector v{rows_, {}, {}};
    const double* c = data_.data() + std::size_t{j} * rows_;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (c[i] != 0.0) {
        v.indices.push_back(static_cast<vertex_id>(i));
        v.values.push_back(c[i]);
      }
    }
    return v;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Dense copy of the selected columns (column-major, rows() x |cols|).
template <ColumnOperator Op>
std::vector<double> dense_columns(const Op& op, const IndexSet& cols) {
  std::vector<double> out(op.rows() * cols.size(), 0.0);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    SparseVector c = op.column(cols[k]);
    for (std::size_t e = 0; e < c.indices.size(); ++e) out[k * op.rows() + c.indices[e]] = c.values[e];
  }
  return out;
}

}  // namespace pursuit
