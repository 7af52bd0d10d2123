#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pursuit {

using vertex_id = std::uint32_t;

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad index, bad size, ...).
class invalid_input : public error {
 public:
  using error::error;
};

/// Strictly increasing set of indices below some ambient dimension.
///
/// Used for vertex subsets, column subsets of an operator and solver supports.
class IndexSet {
 public:
  IndexSet() = default;

  /// Sorts and validates; throws on duplicates.
  static IndexSet from_unsorted(std::vector<vertex_id> ids) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw invalid_input("IndexSet: duplicate index");
    }
    return IndexSet(std::move(ids));
  }

  /// Keeps the given order; throws unless it is strictly increasing.
  static IndexSet from_sorted(std::vector<vertex_id> ids) {
    if (std::adjacent_find(ids.begin(), ids.end(), std::greater_equal<>()) != ids.end()) {
      throw invalid_input("IndexSet: indices not strictly increasing");
    }
    return IndexSet(std::move(ids));
  }

  static IndexSet from_list(std::initializer_list<vertex_id> ids) {
    return from_unsorted(std::vector<vertex_id>(ids));
  }

  /// {0, 1, ..., n-1}
  static IndexSet range(std::size_t n) {
    std::vector<vertex_id> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<vertex_id>(i);
    return IndexSet(std::move(ids));
  }

  /// {0, ..., n-1} without `skip`.
  static IndexSet range_without(std::size_t n, vertex_id skip) {
    std::vector<vertex_id> ids;
    ids.reserve(n == 0 ? 0 : n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != skip) ids.push_back(static_cast<vertex_id>(i));
    }
    return IndexSet(std::move(ids));
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  vertex_id operator[](std::size_t i) const { return ids_[i]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  std::span<const vertex_id> view() const { return ids_; }
  const std::vector<vertex_id>& ids() const { return ids_; }

  bool contains(vertex_id v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }

  /// Position of v in the set, or size() when absent.
  std::size_t position(vertex_id v) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
    if (it == ids_.end() || *it != v) return ids_.size();
    return static_cast<std::size_t>(it - ids_.begin());
  }

  /// Every index is < dim.
  bool fits(std::size_t dim) const { return ids_.empty() || ids_.back() < dim; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

  friend IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    std::vector<vertex_id> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet(std::move(out));
  }

  friend IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
    std::vector<vertex_id> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet(std::move(out));
  }

  friend IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
    std::vector<vertex_id> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IndexSet(std::move(out));
  }

  friend bool includes(const IndexSet& super, const IndexSet& sub) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
  }

  /// Maps local positions through `ambient`: {ambient[i] : i in *this}.
  IndexSet lift(const IndexSet& ambient) const {
    std::vector<vertex_id> out;
    out.reserve(ids_.size());
    for (vertex_id i : ids_) out.push_back(ambient[i]);
    return IndexSet(std::move(out));
  }

 private:
  explicit IndexSet(std::vector<vertex_id> ids) : ids_(std::move(ids)) {}
  std::vector<vertex_id> ids_;
};

}  // namespace pursuit
