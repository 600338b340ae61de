#include <catch2/catch_amalgamated.hpp>

#include "texflow/nn/functional.hpp"
#include "texflow/rng.hpp"

using namespace texflow;
using nn::Tensor;

namespace {

Tensor<double> rnd(std::vector<int> shape, Pcg32& rng, double lo = -1,
                   double hi = 1) {
  Tensor<double> t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Independent quadruple-loop convolution used as the oracle.
Tensor<double> conv_oracle(const Tensor<double>& x, const Tensor<double>& k,
                           const Tensor<double>* b, int stride, int pad) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = k.dim(0), KH = k.dim(2), KW = k.dim(3);
  const int OH = (H + 2 * pad - KH) / stride + 1;
  const int OW = (W + 2 * pad - KW) / stride + 1;
  Tensor<double> y({O, OH, OW});
  for (int o = 0; o < O; ++o) {
    for (int i = 0; i < OH; ++i) {
      for (int j = 0; j < OW; ++j) {
        double s = b ? (*b)[o] : 0.0;
        for (int c = 0; c < C; ++c) {
          for (int di = 0; di < KH; ++di) {
            for (int dj = 0; dj < KW; ++dj) {
              const int yy = i * stride + di - pad;
              const int xx = j * stride + dj - pad;
              if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              s += k.at(o * C + c, di, dj) * x.at(c, yy, xx);
            }
          }
        }
        y.at(o, i, j) = s;
      }
    }
  }
  return y;
}

}  // namespace

TEST_CASE("conv2d forward") {
  Pcg32 rng(21);

  SECTION("centered delta kernel is the identity") {
    Tensor<double> x = rnd({1, 5, 7}, rng);
    Tensor<double> k({1, 1, 3, 3});
    k.at(0, 1, 1) = 1.0;
    const auto y = nn::conv2d_fwd<double>(x, k, nullptr, 1, 1);
    CHECK(y == x);
  }

  SECTION("zero kernel broadcasts the bias") {
    Tensor<double> x = rnd({3, 4, 4}, rng);
    Tensor<double> k({2, 3, 3, 3});
    Tensor<double> b({2});
    b[0] = 0.25;
    b[1] = -1.5;
    const auto y = nn::conv2d_fwd<double>(x, k, &b, 1, 1);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(y.at(0, i, j) == 0.25);
        CHECK(y.at(1, i, j) == -1.5);
      }
    }
  }

  SECTION("matches the quadruple-loop oracle (3x3 same-pad fast path)") {
    for (auto [C, O, H, W] : {std::array{1, 1, 4, 4}, std::array{3, 5, 6, 9},
                              std::array{4, 8, 8, 5}, std::array{2, 3, 7, 16}}) {
      Tensor<double> x = rnd({C, H, W}, rng);
      Tensor<double> k = rnd({O, C, 3, 3}, rng);
      Tensor<double> b = rnd({O}, rng);
      const auto fast = nn::conv2d_fwd<double>(x, k, &b, 1, 1);
      const auto ora = conv_oracle(x, k, &b, 1, 1);
      REQUIRE(fast.shape() == ora.shape());
      for (size_t i = 0; i < fast.size(); ++i) {
        CHECK_THAT(fast[i], Catch::Matchers::WithinAbs(ora[i], 1e-12));
      }
    }
  }

  SECTION("matches the oracle on the 1x1 path") {
    Tensor<double> x = rnd({5, 6, 7}, rng);
    Tensor<double> k = rnd({3, 5, 1, 1}, rng);
    Tensor<double> b = rnd({3}, rng);
    const auto fast = nn::conv2d_fwd<double>(x, k, &b, 1, 0);
    const auto ora = conv_oracle(x, k, &b, 1, 0);
    for (size_t i = 0; i < fast.size(); ++i) {
      CHECK_THAT(fast[i], Catch::Matchers::WithinAbs(ora[i], 1e-12));
    }
  }

  SECTION("matches the oracle at stride 2, valid padding") {
    Tensor<double> x = rnd({2, 8, 10}, rng);
    Tensor<double> k = rnd({3, 2, 2, 2}, rng);
    const auto got = nn::conv2d_fwd<double>(x, k, nullptr, 2, 0);
    const auto ora = conv_oracle(x, k, nullptr, 2, 0);
    REQUIRE(got.shape() == std::vector<int>{3, 4, 5});
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK_THAT(got[i], Catch::Matchers::WithinAbs(ora[i], 1e-12));
    }
  }

  SECTION("shape mismatches are rejected") {
    Tensor<double> x = rnd({2, 4, 4}, rng);
    Tensor<double> k = rnd({3, 5, 3, 3}, rng);  // wrong C_in
    CHECK_THROWS_AS(nn::conv2d_fwd<double>(x, k, nullptr, 1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("conv_transpose2d") {
  Pcg32 rng(22);

  SECTION("1x1 input with a 2x2 kernel of ones gives a 2x2 block of ones") {
    Tensor<double> x = Tensor<double>::full({1, 1, 1}, 1.0);
    Tensor<double> k = Tensor<double>::full({1, 1, 2, 2}, 1.0);
    const auto y = nn::conv_transpose2d_fwd<double>(x, k, nullptr, 2);
    REQUIRE(y.shape() == std::vector<int>{1, 2, 2});
    for (size_t i = 0; i < 4; ++i) CHECK(y[i] == 1.0);
  }

  SECTION("zero input broadcasts the bias") {
    Tensor<double> x({3, 2, 2});
    Tensor<double> k = rnd({3, 2, 2, 2}, rng);
    Tensor<double> b({2});
    b[0] = 0.5;
    b[1] = -2.0;
    const auto y = nn::conv_transpose2d_fwd<double>(x, k, &b, 2);
    REQUIRE(y.shape() == std::vector<int>{2, 4, 4});
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(y.at(0, i, j) == 0.5);
        CHECK(y.at(1, i, j) == -2.0);
      }
    }
  }

  SECTION("exact adjoint of the stride-2 valid convolution") {
    for (int trial = 0; trial < 20; ++trial) {
      const int A = 1 + static_cast<int>(rng.below(4));
      const int B = 1 + static_cast<int>(rng.below(4));
      const int h = 2 + static_cast<int>(rng.below(5));
      const int w = 2 + static_cast<int>(rng.below(5));
      Tensor<double> u = rnd({B, 2 * h, 2 * w}, rng);
      Tensor<double> K = rnd({A, B, 2, 2}, rng);
      Tensor<double> v = rnd({A, h, w}, rng);
      const auto conv_u = nn::conv2d_fwd<double>(u, K, nullptr, 2, 0);
      double lhs = 0;
      for (size_t i = 0; i < conv_u.size(); ++i) lhs += conv_u[i] * v[i];
      const auto vt = nn::conv_transpose2d_fwd<double>(v, K, nullptr, 2);
      double rhs = 0;
      for (size_t i = 0; i < vt.size(); ++i) rhs += vt[i] * u[i];
      CHECK_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-10));
    }
  }

  SECTION("kernel extents must equal the stride") {
    Tensor<double> x = rnd({1, 2, 2}, rng);
    Tensor<double> k = rnd({1, 1, 3, 3}, rng);
    CHECK_THROWS_AS(nn::conv_transpose2d_fwd<double>(x, k, nullptr, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("maxpool2") {
  Pcg32 rng(23);

  SECTION("the classic 2x2 block [1,2;3,4] pools to 4") {
    Tensor<double> x({1, 2, 2});
    x.at(0, 0, 0) = 1;
    x.at(0, 0, 1) = 2;
    x.at(0, 1, 0) = 3;
    x.at(0, 1, 1) = 4;
    std::vector<int32_t> argmax;
    const auto y = nn::maxpool2_fwd(x, argmax);
    REQUIRE(y.size() == 1);
    CHECK(y[0] == 4.0);
    CHECK(argmax[0] == 3);
  }

  SECTION("constant field: gradient routes only to the recorded argmax") {
    Tensor<double> x = Tensor<double>::full({1, 4, 4}, 2.5);
    std::vector<int32_t> argmax;
    const auto y = nn::maxpool2_fwd(x, argmax);
    for (size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 2.5);
    Tensor<double> dy = Tensor<double>::full(y.shape(), 1.0);
    Tensor<double> dx(x.shape());
    nn::maxpool2_bwd(dy, argmax, &dx);
    double total = 0;
    int touched = 0;
    for (size_t i = 0; i < dx.size(); ++i) {
      total += dx[i];
      touched += dx[i] != 0.0 ? 1 : 0;
    }
    CHECK(total == 4.0);
    CHECK(touched == 4);  // one winner per 2x2 block
  }

  SECTION("random tensors match the brute-force block max") {
    Tensor<double> x = rnd({3, 6, 8}, rng);
    std::vector<int32_t> argmax;
    const auto y = nn::maxpool2_fwd(x, argmax);
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
          const double m =
              std::max({x.at(c, 2 * i, 2 * j), x.at(c, 2 * i, 2 * j + 1),
                        x.at(c, 2 * i + 1, 2 * j),
                        x.at(c, 2 * i + 1, 2 * j + 1)});
          CHECK(y.at(c, i, j) == m);
        }
      }
    }
  }

  SECTION("odd extents are rejected") {
    Tensor<double> x({1, 3, 4});
    std::vector<int32_t> argmax;
    CHECK_THROWS_AS(nn::maxpool2_fwd(x, argmax), std::invalid_argument);
  }
}

TEST_CASE("elementwise and affine primitives") {
  Pcg32 rng(24);

  SECTION("relu clamps negatives and keeps positives") {
    Tensor<double> x({4});
    x[0] = -2;
    x[1] = -1e-9;
    x[2] = 0;
    x[3] = 3.5;
    const auto y = nn::relu_fwd(x);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == 0.0);
    CHECK(y[3] == 3.5);
  }

  SECTION("softmax of a constant vector is uniform") {
    Tensor<double> x = Tensor<double>::full({5}, 1.7);
    const auto y = nn::softmax_fwd(x, 0);
    for (size_t i = 0; i < 5; ++i) {
      CHECK_THAT(y[i], Catch::Matchers::WithinAbs(0.2, 1e-15));
    }
  }

  SECTION("softmax sums to 1 and is shift invariant") {
    Tensor<double> x = rnd({3, 4, 5}, rng, -5, 5);
    const auto y = nn::softmax_fwd(x, 0);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        double s = 0;
        for (int c = 0; c < 3; ++c) s += y.at(c, i, j);
        CHECK_THAT(s, Catch::Matchers::WithinAbs(1.0, 1e-12));
      }
    }
    Tensor<double> shifted = x;
    for (size_t i = 0; i < shifted.size(); ++i) shifted[i] += 123.0;
    const auto y2 = nn::softmax_fwd(shifted, 0);
    for (size_t i = 0; i < y.size(); ++i) {
      CHECK_THAT(y2[i], Catch::Matchers::WithinAbs(y[i], 1e-12));
    }
  }

  SECTION("softmax on a bad axis is rejected") {
    Tensor<double> x({2, 2});
    CHECK_THROWS_AS(nn::softmax_fwd(x, 2), std::invalid_argument);
  }

  SECTION("dropout mask is deterministic, binary-scaled, seed-sensitive") {
    const auto m1 = nn::dropout_mask<double>({1, 8, 8}, 0.3, 77);
    const auto m2 = nn::dropout_mask<double>({1, 8, 8}, 0.3, 77);
    const auto m3 = nn::dropout_mask<double>({1, 8, 8}, 0.3, 78);
    CHECK(m1 == m2);
    CHECK(m1 != m3);
    const double keep = 1.0 / 0.7;
    int dropped = 0;
    for (size_t i = 0; i < m1.size(); ++i) {
      CHECK((m1[i] == 0.0 || m1[i] == keep));
      dropped += m1[i] == 0.0 ? 1 : 0;
    }
    CHECK(dropped > 0);
    CHECK(dropped < 64);
  }

  SECTION("dense matches a hand matrix product") {
    Tensor<double> x = rnd({4}, rng);
    Tensor<double> w = rnd({3, 4}, rng);
    Tensor<double> b = rnd({3}, rng);
    const auto y = nn::dense_fwd(x, w, &b);
    for (int i = 0; i < 3; ++i) {
      double s = b[i];
      for (int j = 0; j < 4; ++j) s += w[i * 4 + j] * x[j];
      CHECK_THAT(y[i], Catch::Matchers::WithinAbs(s, 1e-13));
    }
  }

  SECTION("mse: zero for identical, one for unit offset, oracle for random") {
    Tensor<double> a = rnd({2, 3, 3}, rng);
    CHECK(nn::mse(a, a) == 0.0);
    Tensor<double> b = a;
    for (size_t i = 0; i < b.size(); ++i) b[i] += 1.0;
    CHECK_THAT(nn::mse(a, b), Catch::Matchers::WithinAbs(1.0, 1e-15));
    Tensor<double> c = rnd({2, 3, 3}, rng);
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - c[i]) * (a[i] - c[i]);
    CHECK_THAT(nn::mse(a, c),
               Catch::Matchers::WithinAbs(s / double(a.size()), 1e-15));
  }
}
