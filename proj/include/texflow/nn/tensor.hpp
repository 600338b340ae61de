#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace texflow::nn {

// Dense row-major n-d array. Rank 3 (channels, height, width) is the
// working shape of the network; rank 1/2 appear for biases and dense
// layers. Shape is fixed per value.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    size_t n = 1;
    for (int d : shape_) {
      if (d <= 0) throw std::invalid_argument("tensor: extents must be > 0");
      n *= static_cast<size_t>(d);
    }
    data_.assign(n, T{});
  }
  Tensor(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    size_t n = 1;
    for (int d : shape_) n *= static_cast<size_t>(d);
    if (n != data_.size()) {
      throw std::invalid_argument("tensor: data does not match shape");
    }
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, T v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  bool empty() const { return data_.empty(); }
  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  // Rank-3 accessor (c, i, j).
  T& at(int c, int i, int j) {
    return data_[(static_cast<size_t>(c) * shape_[1] + i) * shape_[2] + j];
  }
  const T& at(int c, int i, int j) const {
    return data_[(static_cast<size_t>(c) * shape_[1] + i) * shape_[2] + j];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out = Tensor<U>(shape_);
    for (size_t i = 0; i < data_.size(); ++i) {
      out.data()[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace texflow::nn
