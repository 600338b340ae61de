#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "texflow/nn/tensor.hpp"

namespace texflow::nn {

// Reverse-mode tape: every forward op appends a node whose backward closure
// scatters into its parents' gradient slots. Creation order is a topological
// order, so backward() is a single reverse sweep. One tape serves one
// forward/backward pass; batch members each record their own tape.
template <typename T>
class Tape {
 public:
  using NodeId = int32_t;
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  struct Node {
    Tensor<T> owned;
    const Tensor<T>* ref = nullptr;  // external storage (parameters)
    Tensor<T> grad;
    BackwardFn backward;
    bool needs_grad = false;
  };

  NodeId constant(Tensor<T> v) {
    nodes_.push_back(Node{std::move(v), nullptr, {}, nullptr, false});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId input(Tensor<T> v, bool needs_grad = false) {
    nodes_.push_back(Node{std::move(v), nullptr, {}, nullptr, needs_grad});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  // Parameter leaf referencing external storage; the grad slot lives on the
  // tape and is harvested after backward().
  NodeId param(const Tensor<T>* external) {
    nodes_.push_back(Node{{}, external, {}, nullptr, true});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId emit(Tensor<T> value, bool needs_grad, BackwardFn fn) {
    nodes_.push_back(
        Node{std::move(value), nullptr, {}, std::move(fn), needs_grad});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  const Tensor<T>& value(NodeId id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.ref ? *n.ref : n.owned;
  }

  bool needs_grad(NodeId id) const {
    return nodes_[static_cast<size_t>(id)].needs_grad;
  }

  bool has_grad(NodeId id) const {
    return !nodes_[static_cast<size_t>(id)].grad.empty();
  }

  // Gradient slot, allocated (zeroed) on first touch.
  Tensor<T>& grad_ref(NodeId id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty()) n.grad = Tensor<T>(value(id).shape());
    return n.grad;
  }

  // Accumulator pointer for an op's parent: null when the parent does not
  // participate in differentiation, so kernels can skip that output.
  Tensor<T>* grad_sink(NodeId id) {
    if (id < 0 || !needs_grad(id)) return nullptr;
    return &grad_ref(id);
  }

  void backward(NodeId root, T seed = T(1)) {
    Node& r = nodes_[static_cast<size_t>(root)];
    if (!r.needs_grad) {
      throw std::logic_error("tape: backward from a non-differentiable node");
    }
    Tensor<T>& g = grad_ref(root);
    for (size_t i = 0; i < g.size(); ++i) g[i] += seed;
    for (NodeId id = root; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
      n.backward(*this, id);
    }
  }

  size_t node_count() const { return nodes_.size(); }

  void reset() { nodes_.clear(); }

 private:
  std::vector<Node> nodes_;
};

}  // namespace texflow::nn
