#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pursuit/core.hpp"

namespace pursuit {

/// n points in R^d, row-major.
class PointCloud {
 public:
  PointCloud() = default;

  PointCloud(std::size_t n, std::size_t d, std::vector<double> data) : n_(n), d_(d), data_(std::move(data)) {
    if (data_.size() != n_ * d_) {
      throw invalid_input("PointCloud: expected " + std::to_string(n_ * d_) + " values, got " + std::to_string(data_.size()));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw invalid_input("PointCloud: non-finite coordinate");
    }
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace pursuit
