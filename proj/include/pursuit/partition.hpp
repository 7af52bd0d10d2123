#pragma once

#include <string>
#include <vector>

#include "pursuit/core.hpp"

namespace pursuit {

/// Assignment of vertices to clusters 0..k-1; every cluster nonempty.
class Partition {
 public:
  Partition() = default;

  Partition(std::vector<vertex_id> assignment, std::size_t k) : assignment_(std::move(assignment)), k_(k) {
    std::vector<std::size_t> counts(k_, 0);
    for (vertex_id a : assignment_) {
      if (a >= k_) throw invalid_input("Partition: cluster id " + std::to_string(a) + " >= k=" + std::to_string(k_));
      counts[a]++;
    }
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] == 0) throw invalid_input("Partition: cluster " + std::to_string(c) + " is empty");
    }
  }

  /// Relabels arbitrary labels to 0..k-1 in order of first appearance.
  static Partition from_labels(const std::vector<vertex_id>& labels) {
    constexpr vertex_id unseen = ~vertex_id{0};
    std::vector<vertex_id> remap;
    std::vector<vertex_id> out(labels.size());
    vertex_id k = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      vertex_id l = labels[i];
      if (l >= remap.size()) remap.resize(std::size_t{l} + 1, unseen);
      if (remap[l] == unseen) remap[l] = k++;
      out[i] = remap[l];
    }
    return Partition(std::move(out), k);
  }

  /// Contiguous blocks of the given sizes.
  static Partition contiguous(const std::vector<std::size_t>& sizes) {
    std::vector<vertex_id> a;
    for (std::size_t c = 0; c < sizes.size(); ++c) a.insert(a.end(), sizes[c], static_cast<vertex_id>(c));
    return Partition(std::move(a), sizes.size());
  }

  std::size_t num_vertices() const { return assignment_.size(); }
  std::size_t num_clusters() const { return k_; }
  vertex_id cluster_of(vertex_id v) const { return assignment_[v]; }
  const std::vector<vertex_id>& assignment() const { return assignment_; }

  IndexSet cluster(vertex_id c) const {
    std::vector<vertex_id> out;
    for (vertex_id v = 0; v < assignment_.size(); ++v) {
      if (assignment_[v] == c) out.push_back(v);
    }
    return IndexSet::from_sorted(std::move(out));
  }

  /// Dense 0/1 indicator of cluster c.
  std::vector<double> indicator(vertex_id c) const {
    std::vector<double> out(assignment_.size(), 0.0);
    for (std::size_t v = 0; v < assignment_.size(); ++v) out[v] = assignment_[v] == c ? 1.0 : 0.0;
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(k_, 0);
    for (vertex_id a : assignment_) s[a]++;
    return s;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<vertex_id> assignment_;
  std::size_t k_ = 0;
};

}  // namespace pursuit
