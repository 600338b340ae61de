#pragma once

#include <cstddef>
#include <vector>

namespace texflow {

// Dense H x W grid, row-major. (y, x) indexing with y = 0 the bottom row.
template <typename T>
class Grid2D {
 public:
  Grid2D() : height_(0), width_(0) {}
  Grid2D(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(static_cast<size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }

  T& at(int y, int x) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int y, int x) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }

  T* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
  const T* row(int y) const {
    return data_.data() + static_cast<size_t>(y) * width_;
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool operator==(const Grid2D&) const = default;

 private:
  int height_;
  int width_;
  std::vector<T> data_;
};

}  // namespace texflow
