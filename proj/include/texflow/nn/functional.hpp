#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "texflow/nn/tensor.hpp"
#include "texflow/rng.hpp"

// Raw forward/backward kernels on dense tensors. Backward kernels
// accumulate (+=) into caller-provided gradient tensors so the tape can sum
// fan-in contributions without temporaries. The 3x3 stride-1 same-pad
// convolution dominates training cost and gets a register-blocked path;
// everything else keeps the straightforward loops.
namespace texflow::nn {

namespace detail {

template <typename T>
void check_conv_shapes(const Tensor<T>& x, const Tensor<T>& k,
                       const Tensor<T>* b) {
  if (x.rank() != 3 || k.rank() != 4) {
    throw std::invalid_argument("conv2d: need x rank 3 and k rank 4");
  }
  if (k.dim(1) != x.dim(0)) {
    throw std::invalid_argument("conv2d: channel mismatch x" +
                                shape_str(x.shape()) + " k" +
                                shape_str(k.shape()));
  }
  if (b && (b->rank() != 1 || b->dim(0) != k.dim(0))) {
    throw std::invalid_argument("conv2d: bias shape mismatch");
  }
}

// Copies x (C,H,W) into a zero-framed (C,H+2p,W+2p) scratch.
template <typename T>
void pad_into(const Tensor<T>& x, int pad, std::vector<T>& out) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int Hp = H + 2 * pad, Wp = W + 2 * pad;
  out.assign(static_cast<size_t>(C) * Hp * Wp, T{});
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; ++i) {
      const T* src = x.data() + (static_cast<size_t>(c) * H + i) * W;
      T* dst = out.data() + (static_cast<size_t>(c) * Hp + i + pad) * Wp + pad;
      std::memcpy(dst, src, sizeof(T) * static_cast<size_t>(W));
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// conv2d: x (C,H,W), k (O,C,KH,KW), b (O) -> y (O,OH,OW)
// OH = (H + 2 pad - KH) / stride + 1.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> conv2d_fwd(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>* b,
                     int stride = 1, int pad = -1) {
  detail::check_conv_shapes(x, k, b);
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = k.dim(0), KH = k.dim(2), KW = k.dim(3);
  if (pad < 0) pad = KH / 2;  // same-pad for odd kernels at stride 1
  const int OH = (H + 2 * pad - KH) / stride + 1;
  const int OW = (W + 2 * pad - KW) / stride + 1;
  if (OH <= 0 || OW <= 0 || (H + 2 * pad - KH) % stride != 0) {
    throw std::invalid_argument("conv2d: extents incompatible with kernel");
  }
  Tensor<T> y({O, OH, OW});

  if (KH == 1 && KW == 1 && stride == 1 && pad == 0) {
    const size_t n = static_cast<size_t>(H) * W;
    for (int o = 0; o < O; ++o) {
      T* yo = y.data() + o * n;
      const T bias = b ? (*b)[o] : T{};
      std::fill(yo, yo + n, bias);
      for (int c = 0; c < C; ++c) {
        const T w = k[static_cast<size_t>(o) * C + c];
        const T* xc = x.data() + c * n;
#pragma omp simd
        for (size_t i = 0; i < n; ++i) yo[i] += w * xc[i];
      }
    }
    return y;
  }

  if (KH == 3 && KW == 3 && stride == 1 && pad == 1) {
    static thread_local std::vector<T> xpad;
    detail::pad_into(x, 1, xpad);
    const int Wp = W + 2;
    static thread_local std::vector<T> acc;
    acc.assign(static_cast<size_t>(4) * W, T{});
    T* a0 = acc.data();
    T* a1 = a0 + W;
    T* a2 = a1 + W;
    T* a3 = a2 + W;
    int o = 0;
    for (; o + 4 <= O; o += 4) {
      for (int i = 0; i < H; ++i) {
        const T b0 = b ? (*b)[o] : T{};
        const T b1 = b ? (*b)[o + 1] : T{};
        const T b2 = b ? (*b)[o + 2] : T{};
        const T b3 = b ? (*b)[o + 3] : T{};
        std::fill(a0, a0 + W, b0);
        std::fill(a1, a1 + W, b1);
        std::fill(a2, a2 + W, b2);
        std::fill(a3, a3 + W, b3);
        for (int c = 0; c < C; ++c) {
          const T* xr0 = xpad.data() + (static_cast<size_t>(c) * (H + 2) + i) * Wp;
          const T* xr1 = xr0 + Wp;
          const T* xr2 = xr1 + Wp;
          const T* k0 = k.data() + (static_cast<size_t>(o) * C + c) * 9;
          const T* k1 = k0 + static_cast<size_t>(C) * 9;
          const T* k2 = k1 + static_cast<size_t>(C) * 9;
          const T* k3 = k2 + static_cast<size_t>(C) * 9;
#pragma omp simd
          for (int j = 0; j < W; ++j) {
            const T xa = xr0[j], xb = xr0[j + 1], xc = xr0[j + 2];
            const T xd = xr1[j], xe = xr1[j + 1], xf = xr1[j + 2];
            const T xg = xr2[j], xh = xr2[j + 1], xi = xr2[j + 2];
            a0[j] += k0[0] * xa + k0[1] * xb + k0[2] * xc + k0[3] * xd +
                     k0[4] * xe + k0[5] * xf + k0[6] * xg + k0[7] * xh +
                     k0[8] * xi;
            a1[j] += k1[0] * xa + k1[1] * xb + k1[2] * xc + k1[3] * xd +
                     k1[4] * xe + k1[5] * xf + k1[6] * xg + k1[7] * xh +
                     k1[8] * xi;
            a2[j] += k2[0] * xa + k2[1] * xb + k2[2] * xc + k2[3] * xd +
                     k2[4] * xe + k2[5] * xf + k2[6] * xg + k2[7] * xh +
                     k2[8] * xi;
            a3[j] += k3[0] * xa + k3[1] * xb + k3[2] * xc + k3[3] * xd +
                     k3[4] * xe + k3[5] * xf + k3[6] * xg + k3[7] * xh +
                     k3[8] * xi;
          }
        }
        std::memcpy(&y.at(o, i, 0), a0, sizeof(T) * W);
        std::memcpy(&y.at(o + 1, i, 0), a1, sizeof(T) * W);
        std::memcpy(&y.at(o + 2, i, 0), a2, sizeof(T) * W);
        std::memcpy(&y.at(o + 3, i, 0), a3, sizeof(T) * W);
      }
    }
    for (; o < O; ++o) {
      for (int i = 0; i < H; ++i) {
        const T b0 = b ? (*b)[o] : T{};
        std::fill(a0, a0 + W, b0);
        for (int c = 0; c < C; ++c) {
          const T* xr0 = xpad.data() + (static_cast<size_t>(c) * (H + 2) + i) * Wp;
          const T* xr1 = xr0 + Wp;
          const T* xr2 = xr1 + Wp;
          const T* k0 = k.data() + (static_cast<size_t>(o) * C + c) * 9;
#pragma omp simd
          for (int j = 0; j < W; ++j) {
            a0[j] += k0[0] * xr0[j] + k0[1] * xr0[j + 1] + k0[2] * xr0[j + 2] +
                     k0[3] * xr1[j] + k0[4] * xr1[j + 1] + k0[5] * xr1[j + 2] +
                     k0[6] * xr2[j] + k0[7] * xr2[j + 1] + k0[8] * xr2[j + 2];
          }
        }
        std::memcpy(&y.at(o, i, 0), a0, sizeof(T) * W);
      }
    }
    return y;
  }

  // Generic path (used for stride-2 valid convolutions and odd shapes).
  for (int o = 0; o < O; ++o) {
    for (int oi = 0; oi < OH; ++oi) {
      for (int oj = 0; oj < OW; ++oj) {
        T s = b ? (*b)[o] : T{};
        for (int c = 0; c < C; ++c) {
          for (int di = 0; di < KH; ++di) {
            const int ii = oi * stride + di - pad;
            if (ii < 0 || ii >= H) continue;
            for (int dj = 0; dj < KW; ++dj) {
              const int jj = oj * stride + dj - pad;
              if (jj < 0 || jj >= W) continue;
              s += k.at(o * C + c, di, dj) * x.at(c, ii, jj);
            }
          }
        }
        y.at(o, oi, oj) = s;
      }
    }
  }
  return y;
}

template <typename T>
void conv2d_bwd(const Tensor<T>& x, const Tensor<T>& k, const Tensor<T>& dy,
                int stride, int pad, Tensor<T>* dx, Tensor<T>* dk,
                Tensor<T>* db) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = k.dim(0), KH = k.dim(2), KW = k.dim(3);
  if (pad < 0) pad = KH / 2;
  const int OH = dy.dim(1), OW = dy.dim(2);

  if (db) {
    for (int o = 0; o < O; ++o) {
      const T* dyo = dy.data() + static_cast<size_t>(o) * OH * OW;
      T s{};
#pragma omp simd reduction(+ : s)
      for (size_t i = 0; i < static_cast<size_t>(OH) * OW; ++i) s += dyo[i];
      (*db)[o] += s;
    }
  }

  if (KH == 1 && KW == 1 && stride == 1 && pad == 0) {
    const size_t n = static_cast<size_t>(H) * W;
    for (int c = 0; c < C; ++c) {
      const T* xc = x.data() + c * n;
      T* dxc = dx ? dx->data() + c * n : nullptr;
      for (int o = 0; o < O; ++o) {
        const T* dyo = dy.data() + o * n;
        const T w = k[static_cast<size_t>(o) * C + c];
        if (dxc) {
#pragma omp simd
          for (size_t i = 0; i < n; ++i) dxc[i] += w * dyo[i];
        }
        if (dk) {
          T s{};
#pragma omp simd reduction(+ : s)
          for (size_t i = 0; i < n; ++i) s += dyo[i] * xc[i];
          (*dk)[static_cast<size_t>(o) * C + c] += s;
        }
      }
    }
    return;
  }

  if (KH == 3 && KW == 3 && stride == 1 && pad == 1) {
    if (dk) {
      static thread_local std::vector<T> xpad;
      detail::pad_into(x, 1, xpad);
      const int Wp = W + 2;
      const size_t n = static_cast<size_t>(H) * W;
      static thread_local std::vector<T> xs;
      xs.resize(n);
      for (int c = 0; c < C; ++c) {
        for (int di = 0; di < 3; ++di) {
          for (int dj = 0; dj < 3; ++dj) {
            // Contiguous copy of the (di, dj)-shifted padded plane so the
            // dot below runs over one long row.
            for (int i = 0; i < H; ++i) {
              std::memcpy(
                  xs.data() + static_cast<size_t>(i) * W,
                  xpad.data() +
                      (static_cast<size_t>(c) * (H + 2) + i + di) * Wp + dj,
                  sizeof(T) * static_cast<size_t>(W));
            }
            int o = 0;
            for (; o + 4 <= O; o += 4) {
              const T* d0 = dy.data() + static_cast<size_t>(o) * n;
              const T* d1 = d0 + n;
              const T* d2 = d1 + n;
              const T* d3 = d2 + n;
              T s0{}, s1{}, s2{}, s3{};
#pragma omp simd reduction(+ : s0, s1, s2, s3)
              for (size_t i = 0; i < n; ++i) {
                const T xv = xs[i];
                s0 += d0[i] * xv;
                s1 += d1[i] * xv;
                s2 += d2[i] * xv;
                s3 += d3[i] * xv;
              }
              const size_t t = static_cast<size_t>(di) * 3 + dj;
              dk->data()[(static_cast<size_t>(o) * C + c) * 9 + t] += s0;
              dk->data()[(static_cast<size_t>(o + 1) * C + c) * 9 + t] += s1;
              dk->data()[(static_cast<size_t>(o + 2) * C + c) * 9 + t] += s2;
              dk->data()[(static_cast<size_t>(o + 3) * C + c) * 9 + t] += s3;
            }
            for (; o < O; ++o) {
              const T* d0 = dy.data() + static_cast<size_t>(o) * n;
              T s0{};
#pragma omp simd reduction(+ : s0)
              for (size_t i = 0; i < n; ++i) s0 += d0[i] * xs[i];
              dk->data()[(static_cast<size_t>(o) * C + c) * 9 +
                         static_cast<size_t>(di) * 3 + dj] += s0;
            }
          }
        }
      }
    }

    if (dx) {
      // dx is itself a same-pad 3x3 convolution of dy with the kernel
      // transposed across channels and rotated 180 degrees, which reuses
      // the blocked forward path.
      Tensor<T> kflip({C, O, 3, 3});
      for (int o = 0; o < O; ++o) {
        for (int c = 0; c < C; ++c) {
          const T* src = k.data() + (static_cast<size_t>(o) * C + c) * 9;
          T* dst = kflip.data() + (static_cast<size_t>(c) * O + o) * 9;
          for (int t = 0; t < 9; ++t) dst[8 - t] = src[t];
        }
      }
      Tensor<T> g = conv2d_fwd<T>(dy, kflip, nullptr, 1, 1);
      T* dxp = dx->data();
#pragma omp simd
      for (size_t i = 0; i < g.size(); ++i) dxp[i] += g[i];
    }
    return;
  }

  // Generic path.
  for (int o = 0; o < O; ++o) {
    for (int oi = 0; oi < OH; ++oi) {
      for (int oj = 0; oj < OW; ++oj) {
        const T d = dy.at(o, oi, oj);
        for (int c = 0; c < C; ++c) {
          for (int di = 0; di < KH; ++di) {
            const int ii = oi * stride + di - pad;
            if (ii < 0 || ii >= H) continue;
            for (int dj = 0; dj < KW; ++dj) {
              const int jj = oj * stride + dj - pad;
              if (jj < 0 || jj >= W) continue;
              if (dx) dx->at(c, ii, jj) += d * k.at(o * C + c, di, dj);
              if (dk) dk->at(o * C + c, di, dj) += d * x.at(c, ii, jj);
            }
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// conv_transpose2d: x (C,H,W), k (C,O,S,S), b (O), stride S ->
// y (O, H*S, W*S). Exact adjoint of the stride-S valid convolution with the
// same kernel (index roles swapped), so spatial extents multiply by S.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> conv_transpose2d_fwd(const Tensor<T>& x, const Tensor<T>& k,
                               const Tensor<T>* b, int stride = 2) {
  if (x.rank() != 3 || k.rank() != 4) {
    throw std::invalid_argument("conv_transpose2d: need x rank 3, k rank 4");
  }
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = k.dim(1), S = k.dim(2);
  if (k.dim(0) != C || k.dim(3) != S || S != stride) {
    throw std::invalid_argument(
        "conv_transpose2d: kernel must be (C_in, C_out, S, S) with S = "
        "stride; got k" +
        shape_str(k.shape()));
  }
  if (b && (b->rank() != 1 || b->dim(0) != O)) {
    throw std::invalid_argument("conv_transpose2d: bias shape mismatch");
  }
  Tensor<T> y({O, H * S, W * S});
  const int OH = H * S, OW = W * S;
  for (int o = 0; o < O; ++o) {
    T* yo = y.data() + static_cast<size_t>(o) * OH * OW;
    const T bias = b ? (*b)[o] : T{};
    std::fill(yo, yo + static_cast<size_t>(OH) * OW, bias);
    for (int c = 0; c < C; ++c) {
      const T* xc = x.data() + static_cast<size_t>(c) * H * W;
      const T* kp = k.data() + (static_cast<size_t>(c) * O + o) * S * S;
      for (int i = 0; i < H; ++i) {
        for (int di = 0; di < S; ++di) {
          T* dst = yo + static_cast<size_t>(i * S + di) * OW;
          for (int dj = 0; dj < S; ++dj) {
            const T w = kp[di * S + dj];
            const T* src = xc + static_cast<size_t>(i) * W;
            for (int j = 0; j < W; ++j) dst[j * S + dj] += w * src[j];
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
void conv_transpose2d_bwd(const Tensor<T>& x, const Tensor<T>& k,
                          const Tensor<T>& dy, int stride, Tensor<T>* dx,
                          Tensor<T>* dk, Tensor<T>* db) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = k.dim(1), S = k.dim(2);
  const int OW = W * S;
  if (db) {
    for (int o = 0; o < O; ++o) {
      const T* dyo = dy.data() + static_cast<size_t>(o) * H * S * OW;
      T s{};
#pragma omp simd reduction(+ : s)
      for (size_t i = 0; i < static_cast<size_t>(H) * S * OW; ++i) s += dyo[i];
      (*db)[o] += s;
    }
  }
  for (int c = 0; c < C; ++c) {
    const T* xc = x.data() + static_cast<size_t>(c) * H * W;
    T* dxc = dx ? dx->data() + static_cast<size_t>(c) * H * W : nullptr;
    for (int o = 0; o < O; ++o) {
      const T* dyo = dy.data() + static_cast<size_t>(o) * H * S * OW;
      const T* kp = k.data() + (static_cast<size_t>(c) * O + o) * S * S;
      T* dkp = dk ? dk->data() + (static_cast<size_t>(c) * O + o) * S * S
                  : nullptr;
      for (int di = 0; di < S; ++di) {
        for (int dj = 0; dj < S; ++dj) {
          const T w = kp[di * S + dj];
          T grad_w{};
          for (int i = 0; i < H; ++i) {
            const T* dyr = dyo + static_cast<size_t>(i * S + di) * OW + dj;
            const T* xr = xc + static_cast<size_t>(i) * W;
            T* dxr = dxc ? dxc + static_cast<size_t>(i) * W : nullptr;
            T s{};
#pragma omp simd reduction(+ : s)
            for (int j = 0; j < W; ++j) s += dyr[j * S] * xr[j];
            grad_w += s;
            if (dxr) {
#pragma omp simd
              for (int j = 0; j < W; ++j) dxr[j] += w * dyr[j * S];
            }
          }
          if (dkp) dkp[di * S + dj] += grad_w;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2, with recorded argmax (flat input indices).
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> maxpool2_fwd(const Tensor<T>& x, std::vector<int32_t>& argmax) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (H % 2 != 0 || W % 2 != 0) {
    throw std::invalid_argument("maxpool2: extents must be even, got " +
                                shape_str(x.shape()));
  }
  Tensor<T> y({C, H / 2, W / 2});
  argmax.resize(y.size());
  size_t oi = 0;
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < H; i += 2) {
      for (int j = 0; j < W; j += 2) {
        const size_t base = (static_cast<size_t>(c) * H + i) * W + j;
        size_t best = base;
        T v = x[base];
        if (x[base + 1] > v) { v = x[base + 1]; best = base + 1; }
        if (x[base + W] > v) { v = x[base + W]; best = base + W; }
        if (x[base + W + 1] > v) { v = x[base + W + 1]; best = base + W + 1; }
        y[oi] = v;
        argmax[oi] = static_cast<int32_t>(best);
        ++oi;
      }
    }
  }
  return y;
}

template <typename T>
void maxpool2_bwd(const Tensor<T>& dy, const std::vector<int32_t>& argmax,
                  Tensor<T>* dx) {
  for (size_t i = 0; i < dy.size(); ++i) {
    (*dx)[static_cast<size_t>(argmax[i])] += dy[i];
  }
}

// ---------------------------------------------------------------------------
// Elementwise and affine primitives.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> relu_fwd(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{} ? x[i] : T{};
  return y;
}

template <typename T>
void relu_bwd(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx) {
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] > T{}) (*dx)[i] += dy[i];
  }
}

template <typename T>
Tensor<T> sigmoid_fwd(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    y[i] = T(1) / (T(1) + std::exp(-x[i]));
  }
  return y;
}

template <typename T>
void sigmoid_bwd(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>* dx) {
  for (size_t i = 0; i < y.size(); ++i) {
    (*dx)[i] += dy[i] * y[i] * (T(1) - y[i]);
  }
}

// Numerically stabilized softmax along `axis`.
template <typename T>
Tensor<T> softmax_fwd(const Tensor<T>& x, int axis) {
  if (axis < 0 || axis >= x.rank()) {
    throw std::invalid_argument("softmax: bad axis");
  }
  const int n = x.dim(axis);
  if (n <= 0) throw std::invalid_argument("softmax: empty axis");
  size_t inner = 1, outer = 1;
  for (int i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  for (int i = 0; i < axis; ++i) outer *= x.dim(i);
  Tensor<T> y(x.shape());
  for (size_t a = 0; a < outer; ++a) {
    for (size_t b = 0; b < inner; ++b) {
      const size_t base = a * n * inner + b;
      T mx = x[base];
      for (int i = 1; i < n; ++i) mx = std::max(mx, x[base + i * inner]);
      T sum{};
      for (int i = 0; i < n; ++i) {
        const T e = std::exp(x[base + i * inner] - mx);
        y[base + i * inner] = e;
        sum += e;
      }
      for (int i = 0; i < n; ++i) y[base + i * inner] /= sum;
    }
  }
  return y;
}

template <typename T>
void softmax_bwd(const Tensor<T>& y, const Tensor<T>& dy, int axis,
                 Tensor<T>* dx) {
  const int n = y.dim(axis);
  size_t inner = 1, outer = 1;
  for (int i = axis + 1; i < y.rank(); ++i) inner *= y.dim(i);
  for (int i = 0; i < axis; ++i) outer *= y.dim(i);
  for (size_t a = 0; a < outer; ++a) {
    for (size_t b = 0; b < inner; ++b) {
      const size_t base = a * n * inner + b;
      T dot{};
      for (int i = 0; i < n; ++i) {
        dot += dy[base + i * inner] * y[base + i * inner];
      }
      for (int i = 0; i < n; ++i) {
        (*dx)[base + i * inner] +=
            y[base + i * inner] * (dy[base + i * inner] - dot);
      }
    }
  }
}

// Inverted dropout: kept entries scale by 1/(1-rate) so eval needs no
// rescaling. The mask is a pure function of the seed.
template <typename T>
Tensor<T> dropout_mask(const std::vector<int>& shape, double rate,
                       uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1)");
  }
  Tensor<T> mask(shape);
  Pcg32 rng(seed);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.uniform() >= rate ? keep_scale : T{};
  }
  return mask;
}

// dense: x (n) flat, w (m,n), b (m) -> y (m)
template <typename T>
Tensor<T> dense_fwd(const Tensor<T>& x, const Tensor<T>& w,
                    const Tensor<T>* b) {
  if (w.rank() != 2 || w.dim(1) != static_cast<int>(x.size())) {
    throw std::invalid_argument("dense: weight/input mismatch");
  }
  const int m = w.dim(0), n = w.dim(1);
  Tensor<T> y({m});
  for (int i = 0; i < m; ++i) {
    T s = b ? (*b)[i] : T{};
    const T* wr = w.data() + static_cast<size_t>(i) * n;
#pragma omp simd reduction(+ : s)
    for (int j = 0; j < n; ++j) s += wr[j] * x[j];
    y[i] = s;
  }
  return y;
}

template <typename T>
void dense_bwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
               Tensor<T>* dx, Tensor<T>* dw, Tensor<T>* db) {
  const int m = w.dim(0), n = w.dim(1);
  for (int i = 0; i < m; ++i) {
    const T d = dy[i];
    const T* wr = w.data() + static_cast<size_t>(i) * n;
    if (db) (*db)[i] += d;
    if (dx) {
#pragma omp simd
      for (int j = 0; j < n; ++j) (*dx)[j] += d * wr[j];
    }
    if (dw) {
      T* dwr = dw->data() + static_cast<size_t>(i) * n;
#pragma omp simd
      for (int j = 0; j < n; ++j) dwr[j] += d * x[j];
    }
  }
}

// Mean squared error over all elements.
template <typename T>
double mse(const Tensor<T>& pred, const Tensor<T>& target) {
  if (!pred.same_shape(target)) {
    throw std::invalid_argument("mse: shape mismatch");
  }
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

}  // namespace texflow::nn
