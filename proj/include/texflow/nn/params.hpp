#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "texflow/nn/tensor.hpp"
#include "texflow/rng.hpp"

namespace texflow::nn {

// Named parameters with matching gradient slots. Creation order is fixed and
// recorded; it drives initialization draws, Adam state layout, and
// checkpoint layout, so a given seed yields bit-identical parameters.
template <typename T>
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool touched = false;  // written by any gradient reduction since reset
  };

  explicit ParameterStore(uint64_t seed = 0) : seed_(seed) {}

  uint64_t seed() const { return seed_; }

  Entry& create(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) {
      throw std::invalid_argument("parameter exists: " + name);
    }
    auto e = std::make_unique<Entry>();
    e->name = name;
    e->value = Tensor<T>(shape);
    e->grad = Tensor<T>(std::move(shape));
    index_[name] = entries_.size();
    entries_.push_back(std::move(e));
    return *entries_.back();
  }

  Entry* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : entries_[it->second].get();
  }
  const Entry* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : entries_[it->second].get();
  }

  Entry& at(const std::string& name) {
    Entry* e = find(name);
    if (!e) throw std::out_of_range("no such parameter: " + name);
    return *e;
  }

  size_t index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw std::out_of_range("no such parameter: " + name);
    }
    return it->second;
  }

  size_t count() const { return entries_.size(); }
  Entry& entry(size_t i) { return *entries_[i]; }
  const Entry& entry(size_t i) const { return *entries_[i]; }

  size_t total_values() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e->value.size();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries_) {
      std::fill(e->grad.vec().begin(), e->grad.vec().end(), T{});
      e->touched = false;
    }
  }

  bool all_touched() const {
    for (const auto& e : entries_) {
      if (!e->touched) return false;
    }
    return true;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e->name);
    return out;
  }

  // Deep copy of values (checkpoint-in-memory).
  std::vector<Tensor<T>> snapshot_values() const {
    std::vector<Tensor<T>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e->value);
    return out;
  }

  void restore_values(const std::vector<Tensor<T>>& values) {
    if (values.size() != entries_.size()) {
      throw std::invalid_argument("restore_values: count mismatch");
    }
    for (size_t i = 0; i < values.size(); ++i) {
      if (!values[i].same_shape(entries_[i]->value)) {
        throw std::invalid_argument("restore_values: shape mismatch at " +
                                    entries_[i]->name);
      }
      entries_[i]->value = values[i];
    }
  }

 private:
  uint64_t seed_;
  std::vector<std::unique_ptr<Entry>> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// He-normal fill for ReLU stacks: std = sqrt(2 / fan_in).
template <typename T>
void init_he_normal(Tensor<T>& t, int fan_in, Pcg32& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(stddev * rng.normal());
  }
}

}  // namespace texflow::nn
