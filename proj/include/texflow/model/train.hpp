#pragma once

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/data/dataset.hpp"
#include "texflow/model/unet.hpp"
#include "texflow/nn/adam.hpp"
#include "texflow/nn/ops.hpp"
#include "texflow/rng.hpp"

namespace texflow::model {

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  int epochs = 100;
  uint64_t shuffle_seed = 0;
  int checkpoint_cadence = 0;  // 0 = only the best checkpoint
  int threads = 0;             // 0 = all available

  void validate() const {
    if (batch_size < 1) throw ConfigError("training: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("training: epochs must be >= 1");
    if (!(learning_rate >= 0.0)) {
      throw ConfigError("training: learning rate must be >= 0");
    }
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0, val_loss = 0;
  double train_loss_u = 0, train_loss_v = 0;
  double val_loss_u = 0, val_loss_v = 0;
};

struct TrainReport {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();
  double wall_seconds = 0;
  // Every parameter's gradient slot was written during the first step.
  bool gradient_flow_ok = false;

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write report csv: " + path);
    os << "epoch, train_loss, val_loss, train_loss_u, train_loss_v, "
          "val_loss_u, val_loss_v\n";
    for (const auto& e : history) {
      os << e.epoch << ", " << e.train_loss << ", " << e.val_loss << ", "
         << e.train_loss_u << ", " << e.train_loss_v << ", " << e.val_loss_u
         << ", " << e.val_loss_v << '\n';
    }
  }

  void write_text(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write report: " + path);
    os << "texflow_train_report: 1\n";
    os << "epochs: " << history.size() << "\n";
    os << "best_epoch: " << best_epoch << "\n";
    os << "best_val_loss: " << best_val << "\n";
    os << "wall_seconds: " << wall_seconds << "\n";
    os << "gradient_flow_ok: " << (gradient_flow_ok ? 1 : 0) << "\n";
  }
};

template <typename T>
struct TrainResult {
  TrainReport report;
  std::vector<nn::Tensor<T>> best_params;  // values at the best epoch
};

namespace detail {

// Joint/U/V mean squared errors of one prediction against its target.
template <typename T>
inline void channel_losses(const nn::Tensor<T>& pred,
                           const nn::Tensor<float>& target, double& lu,
                           double& lv) {
  const size_t plane = static_cast<size_t>(pred.dim(1)) * pred.dim(2);
  double su = 0, sv = 0;
  for (size_t i = 0; i < plane; ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    su += d * d;
  }
  for (size_t i = 0; i < plane; ++i) {
    const double d = static_cast<double>(pred[plane + i]) - target[plane + i];
    sv += d * d;
  }
  lu = su / static_cast<double>(plane);
  lv = sv / static_cast<double>(plane);
}

}  // namespace detail

// Mini-batch MSE training with seeded shuffling, per-epoch validation in
// eval mode, and best-validation checkpointing. Batch members run in
// parallel; gradients reduce in sample order, so results do not depend on
// the thread count.
template <typename T>
TrainResult<T> train(
    UNet<T>& model, const data::Dataset& ds, const TrainConfig& cfg,
    const std::function<void(int, const nn::ParameterStore<T>&)>& on_epoch =
        {}) {
  cfg.validate();
  const auto train_idx_base = ds.indices(data::Split::kTrain);
  const auto val_idx = ds.indices(data::Split::kVal);
  if (train_idx_base.empty() || val_idx.empty()) {
    throw ConfigError("train: training and validation splits must be "
                      "non-empty");
  }
  if (ds.input_channels() != model.config().in_channels) {
    throw ConfigError("train: dataset has " +
                      std::to_string(ds.input_channels()) +
                      " input channels, model expects " +
                      std::to_string(model.config().in_channels));
  }

  auto& params = model.params();
  nn::AdamState<T> adam(params, cfg.learning_rate);
  const size_t P = params.count();
  const int nt = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

  TrainResult<T> result;
  result.best_params = params.snapshot_values();
  const auto t_start = std::chrono::steady_clock::now();

  // Per-sample forward/backward; returns the joint loss and fills grads.
  auto run_sample = [&](size_t sample_idx, uint64_t dropout_seed,
                        bool training, std::vector<nn::Tensor<T>>* grads,
                        double& lu, double& lv) {
    const data::Sample& s = ds.samples[sample_idx];
    nn::Tape<T> tape;
    std::vector<int32_t> pid;
    const int32_t in = tape.input(s.input.template cast<T>());
    const int32_t out = model.forward(tape, in, training, dropout_seed, &pid);
    detail::channel_losses(tape.value(out), s.target, lu, lv);
    if (grads) {
      const int32_t tgt = tape.constant(s.target.template cast<T>());
      const int32_t loss = nn::mse_loss(tape, out, tgt);
      tape.backward(loss, T(1));
      grads->resize(P);
      for (size_t p = 0; p < P; ++p) {
        if (tape.has_grad(pid[p])) {
          (*grads)[p] = std::move(tape.grad_ref(pid[p]));
        }
      }
    }
  };

  std::vector<size_t> train_idx = train_idx_base;
  bool first_step_done = false;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Pcg32 shuffle_rng(derive_seed(cfg.shuffle_seed, 0x5EEDu, epoch));
    shuffle_rng.shuffle(train_idx.begin(), train_idx.end());

    double ep_u = 0, ep_v = 0;
    for (size_t b0 = 0; b0 < train_idx.size();
         b0 += static_cast<size_t>(cfg.batch_size)) {
      const size_t b1 =
          std::min(b0 + static_cast<size_t>(cfg.batch_size), train_idx.size());
      const int bs = static_cast<int>(b1 - b0);
      std::vector<std::vector<nn::Tensor<T>>> grads(bs);
      std::vector<double> lus(bs), lvs(bs);
      std::exception_ptr err;

#pragma omp parallel for schedule(static) num_threads(nt)
      for (int s = 0; s < bs; ++s) {
        try {
          const size_t idx = train_idx[b0 + s];
          const uint64_t drop_seed =
              derive_seed(cfg.shuffle_seed, 0xD50Fu,
                          static_cast<uint64_t>(epoch), idx);
          run_sample(idx, drop_seed, true, &grads[s], lus[s], lvs[s]);
        } catch (...) {
#pragma omp critical
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);

      for (int s = 0; s < bs; ++s) {
        const double joint = 0.5 * (lus[s] + lvs[s]);
        if (!std::isfinite(joint)) {
          throw DivergenceError(
              "train: non-finite loss at epoch " + std::to_string(epoch) +
              ", sample " + ds.samples[train_idx[b0 + s]].ref.key());
        }
        ep_u += lus[s];
        ep_v += lvs[s];
      }

      // Ordered reduction: mean gradient over the batch.
      const T inv_bs = T(1) / static_cast<T>(bs);
      for (size_t p = 0; p < P; ++p) {
        auto& entry = params.entry(p);
        for (int s = 0; s < bs; ++s) {
          if (grads[s].empty() || grads[s][p].empty()) continue;
          const auto& g = grads[s][p];
          for (size_t j = 0; j < g.size(); ++j) {
            entry.grad[j] += inv_bs * g[j];
          }
          entry.touched = true;
        }
      }
      if (!first_step_done) {
        result.report.gradient_flow_ok = params.all_touched();
        first_step_done = true;
      }
      nn::adam_step(params, adam);
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss_u = ep_u / static_cast<double>(train_idx.size());
    es.train_loss_v = ep_v / static_cast<double>(train_idx.size());
    es.train_loss = 0.5 * (es.train_loss_u + es.train_loss_v);

    // Validation with dropout disabled.
    {
      std::vector<double> lus(val_idx.size()), lvs(val_idx.size());
      std::exception_ptr err;
#pragma omp parallel for schedule(static) num_threads(nt)
      for (long long s = 0; s < static_cast<long long>(val_idx.size()); ++s) {
        try {
          run_sample(val_idx[static_cast<size_t>(s)], 0, false, nullptr,
                     lus[static_cast<size_t>(s)], lvs[static_cast<size_t>(s)]);
        } catch (...) {
#pragma omp critical
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
      double vu = 0, vv = 0;
      for (size_t s = 0; s < val_idx.size(); ++s) {
        vu += lus[s];
        vv += lvs[s];
      }
      es.val_loss_u = vu / static_cast<double>(val_idx.size());
      es.val_loss_v = vv / static_cast<double>(val_idx.size());
      es.val_loss = 0.5 * (es.val_loss_u + es.val_loss_v);
    }
    if (!std::isfinite(es.val_loss)) {
      throw DivergenceError("train: non-finite validation loss at epoch " +
                            std::to_string(epoch));
    }

    result.report.history.push_back(es);
    if (es.val_loss < result.report.best_val) {
      result.report.best_val = es.val_loss;
      result.report.best_epoch = epoch;
      result.best_params = params.snapshot_values();
    }
    if (on_epoch) on_epoch(epoch, params);
  }

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

// Eval-mode prediction for one sample, in normalized units.
template <typename T>
nn::Tensor<float> predict_normalized(const UNet<T>& model,
                                     const data::Sample& s) {
  return model.predict(s.input.template cast<T>()).template cast<float>();
}

// Denormalized prediction: velocity components in lattice units.
template <typename T>
nn::Tensor<float> predict_denormalized(const UNet<T>& model,
                                       const data::Sample& s,
                                       const data::NormalizationStats& stats) {
  if (stats.count() != s.input.dim(0) + 2) {
    throw ConfigError("predict: stats do not match the sample's channels");
  }
  nn::Tensor<float> pred = predict_normalized(model, s);
  data::denormalize(pred, stats, s.input.dim(0));
  return pred;
}

// Patches predicted from one (run, t) reassembled in source x-order.
struct AssembledField {
  int64_t t = 0;
  std::string run_id;
  Grid2D<float> u, v;
  Grid2D<uint8_t> mask;      // solid mask where covered
  Grid2D<uint8_t> coverage;  // 1 where some patch provided values
};

inline AssembledField assemble_patches(
    const std::vector<const data::Sample*>& group,
    const std::vector<nn::Tensor<float>>& preds) {
  if (group.empty() || group.size() != preds.size()) {
    throw ConfigError("assemble_patches: group/prediction size mismatch");
  }
  const int H = group.front()->input.dim(1);
  int width = 0;
  for (const auto* s : group) width = std::max(width, s->ref.x1);
  AssembledField out;
  out.t = group.front()->ref.t;
  out.run_id = group.front()->ref.run_id;
  out.u = Grid2D<float>(H, width, 0.0f);
  out.v = Grid2D<float>(H, width, 0.0f);
  out.mask = Grid2D<uint8_t>(H, width, 0);
  out.coverage = Grid2D<uint8_t>(H, width, 0);
  for (size_t g = 0; g < group.size(); ++g) {
    const data::Sample& s = *group[g];
    const nn::Tensor<float>& p = preds[g];
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < s.ref.x1 - s.ref.x0; ++j) {
        out.u.at(i, s.ref.x0 + j) = p.at(0, i, j);
        out.v.at(i, s.ref.x0 + j) = p.at(1, i, j);
        out.mask.at(i, s.ref.x0 + j) = s.mask.at(i, j);
        out.coverage.at(i, s.ref.x0 + j) = 1;
      }
    }
  }
  return out;
}

}  // namespace texflow::model
