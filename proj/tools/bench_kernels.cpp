// Microbenchmarks for the convolution kernels that dominate training time.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

#include "texflow/nn/functional.hpp"
#include "texflow/rng.hpp"

using texflow::Pcg32;
using texflow::nn::Tensor;

namespace {

template <typename T>
Tensor<T> random_tensor(std::vector<int> shape, Pcg32& rng) {
  Tensor<T> t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(rng.uniform(-1.0, 1.0));
  }
  return t;
}

template <typename T>
void bench_conv(int C, int O, int H, int W, int reps, const char* tag) {
  Pcg32 rng(42);
  Tensor<T> x = random_tensor<T>({C, H, W}, rng);
  Tensor<T> k = random_tensor<T>({O, C, 3, 3}, rng);
  Tensor<T> b = random_tensor<T>({O}, rng);
  Tensor<T> dx({C, H, W}), dk({O, C, 3, 3}), db({O});

  auto t0 = std::chrono::steady_clock::now();
  T sink{};
  for (int r = 0; r < reps; ++r) {
    Tensor<T> y = texflow::nn::conv2d_fwd(x, k, &b, 1, 1);
    sink += y[0];
  }
  auto t1 = std::chrono::steady_clock::now();
  const double fwd_s = std::chrono::duration<double>(t1 - t0).count();
  const double flops =
      2.0 * 9.0 * C * O * H * W * reps;  // MAC = 2 flops
  std::printf("%-18s fwd  C=%-3d O=%-3d %dx%d: %7.2f GFLOP/s\n", tag, C, O, H,
              W, flops / fwd_s / 1e9);

  Tensor<T> dy = random_tensor<T>({O, H, W}, rng);
  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    texflow::nn::conv2d_bwd(x, k, dy, 1, 1, &dx, &dk, &db);
  }
  t1 = std::chrono::steady_clock::now();
  const double bwd_s = std::chrono::duration<double>(t1 - t0).count();
  std::printf("%-18s bwd  C=%-3d O=%-3d %dx%d: %7.2f GFLOP/s\n", tag, C, O, H,
              W, 2.0 * flops / bwd_s / 1e9);
  if (sink == static_cast<T>(0.123456)) std::printf("?\n");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::stoi(argv[1]) : 200;
  std::printf("threads available: %d\n", omp_get_max_threads());
  bench_conv<float>(8, 8, 64, 56, reps, "float");
  bench_conv<float>(16, 16, 32, 28, 4 * reps, "float");
  bench_conv<float>(32, 32, 16, 14, 16 * reps, "float");
  bench_conv<double>(8, 8, 64, 56, reps, "double");
  return 0;
}
