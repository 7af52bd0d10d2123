#pragma once

#include <string>
#include <vector>

#include "pursuit/graph.hpp"
#include "pursuit/operator.hpp"

namespace pursuit {

/// Implicit random-walk Laplacian L = I - D^{-1} A over a SparseGraph.
///
/// Entry (k, i) is delta_ki - A_ki / d_k, so column i has a 1 on the
/// diagonal and -A_ik / d_k at each neighbour k. Never materialised; the
/// graph must outlive the view.
class LaplacianView {
 public:
  explicit LaplacianView(const SparseGraph& g) : graph_(&g), inv_degrees_(g.num_vertices()) {
    for (vertex_id i = 0; i < g.num_vertices(); ++i) {
      if (!(g.degree(i) > 0.0)) {
        throw invalid_input("LaplacianView: vertex " + std::to_string(i) +
                            " has zero degree; drop isolated vertices first");
      }
      inv_degrees_[i] = 1.0 / g.degree(i);
    }
  }

  const SparseGraph& graph() const { return *graph_; }
  std::size_t rows() const { return inv_degrees_.size(); }
  std::size_t cols() const { return inv_degrees_.size(); }
  double inv_degree(vertex_id i) const { return inv_degrees_[i]; }

  SparseVector column(vertex_id i) const {
    auto nb = graph_->neighbors(i);
    auto w = graph_->weights(i);
    SparseVector v{rows(), {}, {}};
    v.indices.reserve(nb.size() + 1);
    v.values.reserve(nb.size() + 1);
    bool placed = false;
    for (std::size_t e = 0; e < nb.size(); ++e) {
      if (!placed && nb[e] > i) {
        v.indices.push_back(i);
        v.values.push_back(1.0);
        placed = true;
      }
      v.indices.push_back(nb[e]);
      v.values.push_back(-w[e] * inv_degrees_[nb[e]]);
    }
    if (!placed) {
      v.indices.push_back(i);
      v.values.push_back(1.0);
    }
    return v;
  }

  /// L_cols x = sum_j x[j] * l_{cols[j]}
  std::vector<double> apply(const IndexSet& cols, std::span<const double> x) const {
    detail::check_apply_args(this->cols(), cols, x.size(), "LaplacianView::apply");
    std::vector<double> out(rows(), 0.0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const vertex_id c = cols[j];
      const double xj = x[j];
      if (xj == 0.0) continue;
      out[c] += xj;
      auto nb = graph_->neighbors(c);
      auto w = graph_->weights(c);
      for (std::size_t e = 0; e < nb.size(); ++e) out[nb[e]] -= xj * w[e] * inv_degrees_[nb[e]];
    }
    return out;
  }

  /// [<l_j, r>] for j in cols.
  std::vector<double> apply_transpose(const IndexSet& cols, std::span<const double> r) const {
    detail::check_transpose_args(rows(), this->cols(), cols, r.size(), "LaplacianView::apply_transpose");
    std::vector<double> out(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const vertex_id c = cols[j];
      auto nb = graph_->neighbors(c);
      auto w = graph_->weights(c);
      double s = r[c];
      for (std::size_t e = 0; e < nb.size(); ++e) s -= w[e] * r[nb[e]] * inv_degrees_[nb[e]];
      out[j] = s;
    }
    return out;
  }

  /// L x over all columns.
  std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != cols()) throw invalid_input("LaplacianView::multiply: dimension mismatch");
    std::vector<double> out(rows());
    for (vertex_id i = 0; i < rows(); ++i) {
      auto nb = graph_->neighbors(i);
      auto w = graph_->weights(i);
      double s = 0.0;
      for (std::size_t e = 0; e < nb.size(); ++e) s += w[e] * x[nb[e]];
      out[i] = x[i] - s * inv_degrees_[i];
    }
    return out;
  }

  /// Row-major dense copy; for diagnostics on small graphs only.
  std::vector<double> to_dense_row_major() const {
    const std::size_t n = rows();
    std::vector<double> out(n * n, 0.0);
    for (vertex_id i = 0; i < n; ++i) {
      out[std::size_t{i} * n + i] = 1.0;
      auto nb = graph_->neighbors(i);
      auto w = graph_->weights(i);
      for (std::size_t e = 0; e < nb.size(); ++e) out[std::size_t{i} * n + nb[e]] = -w[e] * inv_degrees_[i];
    }
    return out;
  }

 private:
  const SparseGraph* graph_;
  std::vector<double> inv_degrees_;
};

static_assert(ColumnOperator<LaplacianView>);
static_assert(ColumnOperator<DenseOperator>);

}  // namespace pursuit
