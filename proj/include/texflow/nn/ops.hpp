#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "texflow/nn/functional.hpp"
#include "texflow/nn/tape.hpp"

// Tape-recorded layers. Each op runs the functional kernel forward and
// registers a closure that routes gradients to its parents. Pass -1 for an
// absent bias.
namespace texflow::nn {

template <typename T>
using NodeId = typename Tape<T>::NodeId;

template <typename T>
int32_t conv2d(Tape<T>& t, int32_t x, int32_t k, int32_t b, int stride = 1,
               int pad = -1) {
  const Tensor<T>* bias = b >= 0 ? &t.value(b) : nullptr;
  Tensor<T> y = conv2d_fwd(t.value(x), t.value(k), bias, stride, pad);
  const bool ng = t.needs_grad(x) || t.needs_grad(k) || (b >= 0 && t.needs_grad(b));
  return t.emit(std::move(y), ng, [x, k, b, stride, pad](Tape<T>& tp, int32_t self) {
    conv2d_bwd(tp.value(x), tp.value(k), tp.grad_ref(self), stride, pad,
               tp.grad_sink(x), tp.grad_sink(k),
               b >= 0 ? tp.grad_sink(b) : nullptr);
  });
}

template <typename T>
int32_t conv_transpose2d(Tape<T>& t, int32_t x, int32_t k, int32_t b,
                         int stride = 2) {
  const Tensor<T>* bias = b >= 0 ? &t.value(b) : nullptr;
  Tensor<T> y = conv_transpose2d_fwd(t.value(x), t.value(k), bias, stride);
  const bool ng = t.needs_grad(x) || t.needs_grad(k) || (b >= 0 && t.needs_grad(b));
  return t.emit(std::move(y), ng, [x, k, b, stride](Tape<T>& tp, int32_t self) {
    conv_transpose2d_bwd(tp.value(x), tp.value(k), tp.grad_ref(self), stride,
                         tp.grad_sink(x), tp.grad_sink(k),
                         b >= 0 ? tp.grad_sink(b) : nullptr);
  });
}

template <typename T>
int32_t maxpool2(Tape<T>& t, int32_t x) {
  std::vector<int32_t> argmax;
  Tensor<T> y = maxpool2_fwd(t.value(x), argmax);
  return t.emit(std::move(y), t.needs_grad(x),
                [x, am = std::move(argmax)](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    maxpool2_bwd(tp.grad_ref(self), am, dx);
                  }
                });
}

template <typename T>
int32_t relu(Tape<T>& t, int32_t x) {
  Tensor<T> y = relu_fwd(t.value(x));
  return t.emit(std::move(y), t.needs_grad(x),
                [x](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    relu_bwd(tp.value(x), tp.grad_ref(self), dx);
                  }
                });
}

template <typename T>
int32_t sigmoid(Tape<T>& t, int32_t x) {
  Tensor<T> y = sigmoid_fwd(t.value(x));
  return t.emit(std::move(y), t.needs_grad(x),
                [x](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    sigmoid_bwd(tp.value(self), tp.grad_ref(self), dx);
                  }
                });
}

template <typename T>
int32_t softmax(Tape<T>& t, int32_t x, int axis) {
  Tensor<T> y = softmax_fwd(t.value(x), axis);
  return t.emit(std::move(y), t.needs_grad(x),
                [x, axis](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    softmax_bwd(tp.value(self), tp.grad_ref(self), axis, dx);
                  }
                });
}

// Inverted dropout; identity when training is false. The mask is a pure
// function of `seed`, so repeated forward passes reproduce it.
template <typename T>
int32_t dropout(Tape<T>& t, int32_t x, double rate, uint64_t seed,
                bool training) {
  if (!training || rate == 0.0) return x;
  Tensor<T> mask = dropout_mask<T>(t.value(x).shape(), rate, seed);
  const Tensor<T>& xv = t.value(x);
  Tensor<T> y(xv.shape());
  for (size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * mask[i];
  return t.emit(std::move(y), t.needs_grad(x),
                [x, m = std::move(mask)](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    const Tensor<T>& dy = tp.grad_ref(self);
                    for (size_t i = 0; i < dy.size(); ++i) {
                      (*dx)[i] += dy[i] * m[i];
                    }
                  }
                });
}

template <typename T>
int32_t dense(Tape<T>& t, int32_t x, int32_t w, int32_t b) {
  const Tensor<T>* bias = b >= 0 ? &t.value(b) : nullptr;
  Tensor<T> y = dense_fwd(t.value(x), t.value(w), bias);
  const bool ng = t.needs_grad(x) || t.needs_grad(w) || (b >= 0 && t.needs_grad(b));
  return t.emit(std::move(y), ng, [x, w, b](Tape<T>& tp, int32_t self) {
    dense_bwd(tp.value(x), tp.value(w), tp.grad_ref(self), tp.grad_sink(x),
              tp.grad_sink(w), b >= 0 ? tp.grad_sink(b) : nullptr);
  });
}

template <typename T>
int32_t add(Tape<T>& t, int32_t a, int32_t b) {
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("add: shape mismatch");
  Tensor<T> y(av.shape());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return t.emit(std::move(y), t.needs_grad(a) || t.needs_grad(b),
                [a, b](Tape<T>& tp, int32_t self) {
                  const Tensor<T>& dy = tp.grad_ref(self);
                  if (Tensor<T>* da = tp.grad_sink(a)) {
                    for (size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i];
                  }
                  if (Tensor<T>* db = tp.grad_sink(b)) {
                    for (size_t i = 0; i < dy.size(); ++i) (*db)[i] += dy[i];
                  }
                });
}

// y[c] = x[c] * a[0] for every channel c; `a` is a (1, H, W) gate map.
template <typename T>
int32_t mul_channel_broadcast(Tape<T>& t, int32_t x, int32_t a) {
  const Tensor<T>& xv = t.value(x);
  const Tensor<T>& av = t.value(a);
  if (av.rank() != 3 || av.dim(0) != 1 || av.dim(1) != xv.dim(1) ||
      av.dim(2) != xv.dim(2)) {
    throw std::invalid_argument("mul_channel_broadcast: gate must be (1,H,W)");
  }
  const size_t plane = static_cast<size_t>(xv.dim(1)) * xv.dim(2);
  Tensor<T> y(xv.shape());
  for (int c = 0; c < xv.dim(0); ++c) {
    const T* xc = xv.data() + c * plane;
    T* yc = y.data() + c * plane;
    for (size_t i = 0; i < plane; ++i) yc[i] = xc[i] * av[i];
  }
  return t.emit(std::move(y), t.needs_grad(x) || t.needs_grad(a),
                [x, a, plane](Tape<T>& tp, int32_t self) {
                  const Tensor<T>& dy = tp.grad_ref(self);
                  const Tensor<T>& xv = tp.value(x);
                  const Tensor<T>& av = tp.value(a);
                  const int C = xv.dim(0);
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    for (int c = 0; c < C; ++c) {
                      for (size_t i = 0; i < plane; ++i) {
                        (*dx)[c * plane + i] += dy[c * plane + i] * av[i];
                      }
                    }
                  }
                  if (Tensor<T>* da = tp.grad_sink(a)) {
                    for (int c = 0; c < C; ++c) {
                      for (size_t i = 0; i < plane; ++i) {
                        (*da)[i] += dy[c * plane + i] * xv[c * plane + i];
                      }
                    }
                  }
                });
}

template <typename T>
int32_t concat_channels(Tape<T>& t, int32_t a, int32_t b) {
  const Tensor<T>& av = t.value(a);
  const Tensor<T>& bv = t.value(b);
  if (av.dim(1) != bv.dim(1) || av.dim(2) != bv.dim(2)) {
    throw std::invalid_argument("concat_channels: spatial mismatch");
  }
  Tensor<T> y({av.dim(0) + bv.dim(0), av.dim(1), av.dim(2)});
  std::copy(av.data(), av.data() + av.size(), y.data());
  std::copy(bv.data(), bv.data() + bv.size(), y.data() + av.size());
  return t.emit(std::move(y), t.needs_grad(a) || t.needs_grad(b),
                [a, b](Tape<T>& tp, int32_t self) {
                  const Tensor<T>& dy = tp.grad_ref(self);
                  const size_t na = tp.value(a).size();
                  if (Tensor<T>* da = tp.grad_sink(a)) {
                    for (size_t i = 0; i < na; ++i) (*da)[i] += dy[i];
                  }
                  if (Tensor<T>* db = tp.grad_sink(b)) {
                    for (size_t i = 0; i < dy.size() - na; ++i) {
                      (*db)[i] += dy[na + i];
                    }
                  }
                });
}

// Zero-pads on the bottom/right to (C, H2, W2); crop_hw is its inverse and
// adjoint. The network pads patches up to a multiple of 2^depth and crops
// the head output back.
template <typename T>
int32_t pad_hw(Tape<T>& t, int32_t x, int H2, int W2) {
  const Tensor<T>& xv = t.value(x);
  const int C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  if (H2 < H || W2 < W) throw std::invalid_argument("pad_hw: shrinking pad");
  if (H2 == H && W2 == W) return x;
  Tensor<T> y({C, H2, W2});
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      std::copy(&xv.at(c, i, 0), &xv.at(c, i, 0) + W, &y.at(c, i, 0));
    }
  }
  return t.emit(std::move(y), t.needs_grad(x),
                [x, H, W](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    const Tensor<T>& dy = tp.grad_ref(self);
                    const int C = dx->dim(0);
                    for (int c = 0; c < C; ++c) {
                      for (int i = 0; i < H; ++i) {
                        for (int j = 0; j < W; ++j) {
                          dx->at(c, i, j) += dy.at(c, i, j);
                        }
                      }
                    }
                  }
                });
}

template <typename T>
int32_t crop_hw(Tape<T>& t, int32_t x, int H, int W) {
  const Tensor<T>& xv = t.value(x);
  const int C = xv.dim(0), H0 = xv.dim(1), W0 = xv.dim(2);
  if (H > H0 || W > W0) throw std::invalid_argument("crop_hw: growing crop");
  if (H == H0 && W == W0) return x;
  Tensor<T> y({C, H, W});
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      std::copy(&xv.at(c, i, 0), &xv.at(c, i, 0) + W, &y.at(c, i, 0));
    }
  }
  return t.emit(std::move(y), t.needs_grad(x),
                [x, H, W](Tape<T>& tp, int32_t self) {
                  if (Tensor<T>* dx = tp.grad_sink(x)) {
                    const Tensor<T>& dy = tp.grad_ref(self);
                    const int C = dx->dim(0);
                    for (int c = 0; c < C; ++c) {
                      for (int i = 0; i < H; ++i) {
                        for (int j = 0; j < W; ++j) {
                          dx->at(c, i, j) += dy.at(c, i, j);
                        }
                      }
                    }
                  }
                });
}

// Scalar node: mean over all elements of (pred - target)^2.
template <typename T>
int32_t mse_loss(Tape<T>& t, int32_t pred, int32_t target) {
  const Tensor<T>& pv = t.value(pred);
  const Tensor<T>& tv = t.value(target);
  Tensor<T> loss({1});
  loss[0] = static_cast<T>(mse(pv, tv));
  return t.emit(std::move(loss), t.needs_grad(pred) || t.needs_grad(target),
                [pred, target](Tape<T>& tp, int32_t self) {
                  const T seed = tp.grad_ref(self)[0];
                  const Tensor<T>& pv = tp.value(pred);
                  const Tensor<T>& tv = tp.value(target);
                  const T scale = seed * T(2) / static_cast<T>(pv.size());
                  if (Tensor<T>* dp = tp.grad_sink(pred)) {
                    for (size_t i = 0; i < pv.size(); ++i) {
                      (*dp)[i] += scale * (pv[i] - tv[i]);
                    }
                  }
                  if (Tensor<T>* dt = tp.grad_sink(target)) {
                    for (size_t i = 0; i < pv.size(); ++i) {
                      (*dt)[i] -= scale * (pv[i] - tv[i]);
                    }
                  }
                });
}

// Additive attention gate: a = sigma(psi . relu(Wg g + Wx x + b)), output
// a (.) x with the single-channel map a broadcast across x's channels.
// Wg, Wx, psi are 1x1 convolutions; g must already share x's extents.
template <typename T>
int32_t attention_gate(Tape<T>& t, int32_t g, int32_t x, int32_t wg_k,
                       int32_t wx_k, int32_t b, int32_t psi_k, int32_t psi_b) {
  const Tensor<T>& gv = t.value(g);
  const Tensor<T>& xv = t.value(x);
  if (gv.dim(1) != xv.dim(1) || gv.dim(2) != xv.dim(2)) {
    throw std::invalid_argument(
        "attention_gate: gating signal extents must match the skip");
  }
  int32_t pg = conv2d(t, g, wg_k, b, 1, 0);
  int32_t px = conv2d(t, x, wx_k, -1, 1, 0);
  int32_t q = relu(t, add(t, pg, px));
  int32_t a = sigmoid(t, conv2d(t, q, psi_k, psi_b, 1, 0));
  return mul_channel_broadcast(t, x, a);
}

}  // namespace texflow::nn
