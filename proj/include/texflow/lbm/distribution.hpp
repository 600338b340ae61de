#pragma once

#include <cstddef>
#include <vector>

#include "texflow/lbm/d2q9.hpp"

namespace texflow::lbm {

// The nine populations on an H x W grid, stored direction-major:
// nine contiguous H*W planes, so collision walks one node across planes
// and streaming shifts whole planes.
class DistributionField {
 public:
  DistributionField() : height_(0), width_(0) {}
  DistributionField(int height, int width)
      : height_(height), width_(width),
        data_(static_cast<size_t>(D2Q9::kQ) * height * width, 0.0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  size_t plane_size() const { return static_cast<size_t>(height_) * width_; }
  size_t size() const { return data_.size(); }

  double* plane(int p) { return data_.data() + p * plane_size(); }
  const double* plane(int p) const { return data_.data() + p * plane_size(); }

  double& at(int p, int y, int x) {
    return data_[p * plane_size() + static_cast<size_t>(y) * width_ + x];
  }
  const double& at(int p, int y, int x) const {
    return data_[p * plane_size() + static_cast<size_t>(y) * width_ + x];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void swap(DistributionField& other) {
    std::swap(height_, other.height_);
    std::swap(width_, other.width_);
    data_.swap(other.data_);
  }

  bool operator==(const DistributionField&) const = default;

 private:
  int height_;
  int width_;
  std::vector<double> data_;
};

}  // namespace texflow::lbm
