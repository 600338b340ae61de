#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/nn/checkpoint.hpp"
#include "texflow/nn/ops.hpp"
#include "texflow/nn/params.hpp"
#include "texflow/nn/tape.hpp"
#include "texflow/rng.hpp"

namespace texflow::model {

struct UNetConfig {
  int in_channels = 4;
  int out_channels = 2;
  int base_filters = 64;  // desk-scale runs use 8
  int depth = 4;          // filter ladder base * (1, 2, 4, ...)
  bool attention = false;
  double dropout_rate = 0.3;
  uint64_t seed = 0;

  int pad_multiple() const { return 1 << depth; }

  void validate() const {
    if (in_channels < 1 || out_channels < 1) {
      throw ConfigError("unet: channel counts must be >= 1");
    }
    if (base_filters < 1) throw ConfigError("unet: base_filters must be >= 1");
    if (depth < 1) throw ConfigError("unet: depth must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw ConfigError("unet: dropout rate must be in [0, 1)");
    }
  }
};

// Encoder-decoder with skip connections. Each encoder stage is
// [conv3x3, relu, conv3x3, relu, dropout, maxpool2] with filters doubling;
// the decoder mirrors it with stride-2 transposed convolutions, skip
// concatenation (attention-gated when configured), and two convolutions;
// a linear 1x1 head maps to the output channels. Inputs are zero-padded to
// a multiple of 2^depth and the output is cropped back, so output extents
// always equal input extents.
template <typename T>
class UNet {
 public:
  explicit UNet(const UNetConfig& cfg) : cfg_(cfg), params_(cfg.seed) {
    cfg_.validate();
    build_parameters();
    initialize();
  }

  const UNetConfig& config() const { return cfg_; }
  nn::ParameterStore<T>& params() { return params_; }
  const nn::ParameterStore<T>& params() const { return params_; }

  // Records the forward graph on `tape`. Parameter leaves are appended in
  // store order first; their node ids are 0..count-1 when the tape is fresh.
  int32_t forward(nn::Tape<T>& tape, int32_t input, bool training,
                  uint64_t dropout_seed,
                  std::vector<int32_t>* param_ids_out = nullptr) const {
    std::vector<int32_t> pid(params_.count());
    for (size_t i = 0; i < params_.count(); ++i) {
      pid[i] = tape.param(&params_.entry(i).value);
    }
    if (param_ids_out) *param_ids_out = pid;

    const auto& xv = tape.value(input);
    if (xv.rank() != 3 || xv.dim(0) != cfg_.in_channels) {
      throw ConfigError("unet: input must be (" +
                        std::to_string(cfg_.in_channels) + ", h, w), got " +
                        nn::shape_str(xv.shape()));
    }
    const int h = xv.dim(1), w = xv.dim(2);
    const int m = cfg_.pad_multiple();
    const int H2 = ((h + m - 1) / m) * m;
    const int W2 = ((w + m - 1) / m) * m;

    auto P = [&](const std::string& name) { return pid[params_.index(name)]; };
    auto conv_block = [&](int32_t x, const std::string& stem) {
      x = nn::relu(tape, nn::conv2d(tape, x, P(stem + ".conv1.k"),
                                    P(stem + ".conv1.b")));
      x = nn::relu(tape, nn::conv2d(tape, x, P(stem + ".conv2.k"),
                                    P(stem + ".conv2.b")));
      return x;
    };

    int32_t cur = nn::pad_hw(tape, input, H2, W2);
    std::vector<int32_t> skips;
    for (int d = 0; d < cfg_.depth; ++d) {
      const std::string stem = "enc" + std::to_string(d + 1);
      cur = conv_block(cur, stem);
      cur = nn::dropout(tape, cur, cfg_.dropout_rate,
                        derive_seed(dropout_seed, 0xD0u, d), training);
      skips.push_back(cur);
      cur = nn::maxpool2(tape, cur);
    }
    cur = conv_block(cur, "bottleneck");
    for (int d = cfg_.depth - 1; d >= 0; --d) {
      const std::string stem = "dec" + std::to_string(d + 1);
      int32_t up = nn::conv_transpose2d(tape, cur, P(stem + ".up.k"),
                                        P(stem + ".up.b"), 2);
      int32_t skip = skips[static_cast<size_t>(d)];
      if (cfg_.attention) {
        skip = nn::attention_gate(tape, up, skip, P(stem + ".gate.wg.k"),
                                  P(stem + ".gate.wx.k"), P(stem + ".gate.b"),
                                  P(stem + ".gate.psi.k"),
                                  P(stem + ".gate.psi.b"));
      }
      cur = nn::concat_channels(tape, skip, up);
      cur = conv_block(cur, stem);
    }
    int32_t head =
        nn::conv2d(tape, cur, P("head.k"), P("head.b"), 1, 0);  // linear
    return nn::crop_hw(tape, head, h, w);
  }

  // Eval-mode forward; a pure function of (parameters, input).
  nn::Tensor<T> predict(const nn::Tensor<T>& input) const {
    nn::Tape<T> tape;
    const int32_t in = tape.input(input);
    const int32_t out = forward(tape, in, /*training=*/false, 0);
    return tape.value(out);
  }

  // Saturates every gate: psi weights zero, psi bias large positive, so the
  // sigmoid is exactly 1 and gated skips pass through unchanged.
  void force_gates_open() {
    for (size_t i = 0; i < params_.count(); ++i) {
      auto& e = params_.entry(i);
      if (e.name.find(".gate.psi.k") != std::string::npos) {
        std::fill(e.value.vec().begin(), e.value.vec().end(), T{});
      } else if (e.name.find(".gate.psi.b") != std::string::npos) {
        std::fill(e.value.vec().begin(), e.value.vec().end(), T(100));
      }
    }
  }

  // Copies every identically-named parameter from `src` (the architectures
  // share all non-gate names).
  template <typename U>
  void copy_shared_from(const UNet<U>& src) {
    for (size_t i = 0; i < params_.count(); ++i) {
      auto& dst = params_.entry(i);
      if (const auto* e = src.params().find(dst.name)) {
        if (e->value.shape() != dst.value.shape()) {
          throw ConfigError("copy_shared_from: shape mismatch at " + dst.name);
        }
        for (size_t j = 0; j < dst.value.size(); ++j) {
          dst.value[j] = static_cast<T>(e->value[j]);
        }
      }
    }
  }

  // Reconstructs the architecture from checkpoint parameter names/shapes.
  static UNetConfig infer_config(const std::vector<nn::CheckpointEntry>& es) {
    UNetConfig cfg;
    cfg.attention = false;
    int depth = 0;
    for (const auto& e : es) {
      if (e.name.find(".gate.") != std::string::npos) cfg.attention = true;
      if (e.name.rfind("enc", 0) == 0) {
        const int d = std::stoi(e.name.substr(3, e.name.find('.') - 3));
        depth = std::max(depth, d);
      }
      if (e.name == "enc1.conv1.k") {
        cfg.base_filters = e.shape.at(0);
        cfg.in_channels = e.shape.at(1);
      }
      if (e.name == "head.k") cfg.out_channels = e.shape.at(0);
    }
    if (depth == 0) throw IoError("checkpoint does not describe a U-Net");
    cfg.depth = depth;
    return cfg;
  }

 private:
  void add_conv(const std::string& name, int c_out, int c_in, int k) {
    params_.create(name + ".k", {c_out, c_in, k, k});
    params_.create(name + ".b", {c_out});
  }

  void build_parameters() {
    const int B = cfg_.base_filters;
    int c_prev = cfg_.in_channels;
    for (int d = 0; d < cfg_.depth; ++d) {
      const int c = B << d;
      const std::string stem = "enc" + std::to_string(d + 1);
      add_conv(stem + ".conv1", c, c_prev, 3);
      add_conv(stem + ".conv2", c, c, 3);
      c_prev = c;
    }
    const int cb = B << cfg_.depth;
    add_conv("bottleneck.conv1", cb, c_prev, 3);
    add_conv("bottleneck.conv2", cb, cb, 3);
    for (int d = cfg_.depth - 1; d >= 0; --d) {
      const int c = B << d;
      const int c_hi = B << (d + 1);
      const std::string stem = "dec" + std::to_string(d + 1);
      params_.create(stem + ".up.k", {c_hi, c, 2, 2});
      params_.create(stem + ".up.b", {c});
      if (cfg_.attention) {
        const int ci = std::max(c / 2, 1);
        params_.create(stem + ".gate.wg.k", {ci, c, 1, 1});
        params_.create(stem + ".gate.wx.k", {ci, c, 1, 1});
        params_.create(stem + ".gate.b", {ci});
        params_.create(stem + ".gate.psi.k", {1, ci, 1, 1});
        params_.create(stem + ".gate.psi.b", {1});
      }
      add_conv(stem + ".conv1", c, 2 * c, 3);
      add_conv(stem + ".conv2", c, c, 3);
    }
    add_conv("head", cfg_.out_channels, B, 1);
  }

  void initialize() {
    Pcg32 rng(derive_seed(cfg_.seed, 0x1417u));
    for (size_t i = 0; i < params_.count(); ++i) {
      auto& e = params_.entry(i);
      const auto& s = e.value.shape();
      if (e.name.find(".gate.psi.b") != std::string::npos) {
        // Gates start open so attention begins as a plain U-Net.
        std::fill(e.value.vec().begin(), e.value.vec().end(), T(3));
      } else if (s.size() == 1) {
        std::fill(e.value.vec().begin(), e.value.vec().end(), T{});
      } else if (e.name.find(".up.k") != std::string::npos) {
        nn::init_he_normal(e.value, s[0], rng);
      } else {
        nn::init_he_normal(e.value, s[1] * s[2] * s[3], rng);
      }
    }
  }

  UNetConfig cfg_;
  nn::ParameterStore<T> params_;
};

}  // namespace texflow::model
