#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "texflow/model/train.hpp"
#include "texflow/rng.hpp"

using namespace texflow;
using namespace texflow::model;
using data::Dataset;
using data::Sample;
using data::Split;
using nn::Tensor;

namespace {

// Small synthetic regression set: targets are a smooth function of the
// input channels, everything already in [0, 1] with identity stats.
Dataset synthetic_dataset(int n_train, int n_val, int n_test, int h, int w,
                          uint64_t seed) {
  Dataset ds;
  ds.seed = seed;
  const int cin = 4;
  ds.stats.channels = {"x", "y", "p", "rho", "u", "v"};
  ds.stats.mins.assign(6, 0.0f);
  ds.stats.maxs.assign(6, 1.0f);
  ds.stats.constant.assign(6, 0);
  Pcg32 rng(seed);
  const int total = n_train + n_val + n_test;
  for (int s = 0; s < total; ++s) {
    Sample smp;
    smp.input = Tensor<float>({cin, h, w});
    smp.target = Tensor<float>({2, h, w});
    smp.mask = Grid2D<uint8_t>(h, w, 0);
    const float phase = static_cast<float>(rng.uniform(0, 1));
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const float fx = static_cast<float>(j) / (w - 1);
        const float fy = static_cast<float>(i) / (h - 1);
        smp.input.at(0, i, j) = fx;
        smp.input.at(1, i, j) = fy;
        smp.input.at(2, i, j) = phase;
        smp.input.at(3, i, j) = 0.5f + 0.5f * fx * fy;
        smp.target.at(0, i, j) = 0.5f + 0.4f * phase * std::sin(3.0f * fx);
        smp.target.at(1, i, j) = 0.5f - 0.3f * phase * fy;
      }
    }
    smp.ref = {"syn", s, 0, w};
    smp.split = s < n_train            ? Split::kTrain
                : s < n_train + n_val  ? Split::kVal
                                       : Split::kTest;
    ds.samples.push_back(std::move(smp));
  }
  return ds;
}

UNetConfig tiny_model(bool attention, uint64_t seed = 5) {
  UNetConfig cfg;
  cfg.in_channels = 4;
  cfg.base_filters = 2;
  cfg.depth = 2;
  cfg.attention = attention;
  cfg.seed = seed;
  return cfg;
}

TrainConfig quick(int epochs, double lr = 1e-3) {
  TrainConfig t;
  t.batch_size = 4;
  t.epochs = epochs;
  t.learning_rate = lr;
  t.shuffle_seed = 3;
  return t;
}

}  // namespace

TEST_CASE("learning rate zero keeps losses constant across epochs") {
  Dataset ds = synthetic_dataset(6, 2, 0, 8, 8, 1);
  UNet<float> net(tiny_model(false));
  const auto result = train(net, ds, quick(4, 0.0));
  const auto& h = result.report.history;
  REQUIRE(h.size() == 4);
  for (size_t e = 1; e < h.size(); ++e) {
    CHECK(h[e].val_loss == h[0].val_loss);
    CHECK_THAT(h[e].train_loss,
               Catch::Matchers::WithinRel(h[0].train_loss, 1e-3));
  }
}

TEST_CASE("training is deterministic given seeds") {
  Dataset ds = synthetic_dataset(6, 2, 0, 8, 8, 1);
  UNet<float> a(tiny_model(true));
  UNet<float> b(tiny_model(true));
  const auto ra = train(a, ds, quick(3));
  const auto rb = train(b, ds, quick(3));
  REQUIRE(ra.report.history.size() == rb.report.history.size());
  for (size_t e = 0; e < ra.report.history.size(); ++e) {
    CHECK(ra.report.history[e].train_loss == rb.report.history[e].train_loss);
    CHECK(ra.report.history[e].val_loss == rb.report.history[e].val_loss);
  }
  for (size_t i = 0; i < a.params().count(); ++i) {
    CHECK(a.params().entry(i).value == b.params().entry(i).value);
  }
}

TEST_CASE("every parameter receives gradient on the first step") {
  Dataset ds = synthetic_dataset(4, 1, 0, 8, 8, 2);
  SECTION("standard") {
    UNet<float> net(tiny_model(false));
    const auto r = train(net, ds, quick(1));
    CHECK(r.report.gradient_flow_ok);
  }
  SECTION("attention") {
    UNet<float> net(tiny_model(true));
    const auto r = train(net, ds, quick(1));
    CHECK(r.report.gradient_flow_ok);
  }
}

TEST_CASE("overfitting a single sample collapses the loss") {
  Dataset ds = synthetic_dataset(1, 0, 0, 8, 8, 3);
  // duplicate the lone sample as validation so the loop has a val split
  Sample val = ds.samples[0];
  val.split = Split::kVal;
  ds.samples.push_back(val);
  UNet<float> net(tiny_model(false));
  TrainConfig tc = quick(150, 3e-3);
  const auto r = train(net, ds, tc);
  const double first = r.report.history.front().train_loss;
  const double last = r.report.history.back().train_loss;
  CHECK(last < 0.02 * first);
}

TEST_CASE("gates initialized open: epoch-1 losses track the standard net") {
  Dataset ds = synthetic_dataset(8, 2, 0, 8, 8, 4);
  UNet<float> plain(tiny_model(false, 7));
  UNet<float> gated(tiny_model(true, 7));
  gated.copy_shared_from(plain);  // identical shared weights
  const auto rp = train(plain, ds, quick(1));
  const auto rg = train(gated, ds, quick(1));
  const double lp = rp.report.history[0].train_loss;
  const double lg = rg.report.history[0].train_loss;
  CHECK(std::abs(lg - lp) / lp < 0.10);
}

TEST_CASE("diverging optimization aborts with a diagnosis") {
  Dataset ds = synthetic_dataset(4, 1, 0, 8, 8, 5);
  UNet<float> net(tiny_model(false));
  CHECK_THROWS_AS(train(net, ds, quick(60, 1e9)), DivergenceError);
}

TEST_CASE("empty splits are rejected") {
  Dataset ds = synthetic_dataset(4, 0, 0, 8, 8, 6);
  UNet<float> net(tiny_model(false));
  CHECK_THROWS_AS(train(net, ds, quick(1)), ConfigError);
}

TEST_CASE("best checkpoint tracks the lowest validation loss") {
  Dataset ds = synthetic_dataset(8, 2, 2, 8, 8, 7);
  UNet<float> net(tiny_model(false));
  const auto r = train(net, ds, quick(6));
  double best = 1e30;
  int best_epoch = 0;
  for (const auto& e : r.report.history) {
    if (e.val_loss < best) {
      best = e.val_loss;
      best_epoch = e.epoch;
    }
  }
  CHECK(r.report.best_epoch == best_epoch);
  CHECK(r.report.best_val == best);
  CHECK(r.best_params.size() == net.params().count());
}

TEST_CASE("predictions reassemble into seamless full fields") {
  // Two patches covering [0, 6) and [6, 12): coordinate channels must join
  // without seams after assembly.
  Dataset ds = synthetic_dataset(2, 1, 0, 8, 6, 8);
  ds.samples[0].ref = {"runX", 10, 0, 6};
  ds.samples[1].ref = {"runX", 10, 6, 12};
  UNet<float> net(tiny_model(false));

  std::vector<const Sample*> group{&ds.samples[0], &ds.samples[1]};
  std::vector<Tensor<float>> preds{predict_normalized(net, ds.samples[0]),
                                   predict_normalized(net, ds.samples[1])};
  const AssembledField f = assemble_patches(group, preds);
  CHECK(f.u.width() == 12);
  CHECK(f.u.height() == 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 12; ++x) CHECK(f.coverage.at(y, x) == 1);
  }
  // patch values appear verbatim at their x-offsets
  CHECK(f.u.at(3, 7) == preds[1].at(0, 3, 1));
  CHECK(f.v.at(2, 2) == preds[0].at(1, 2, 2));
}

TEST_CASE("channel mismatch between dataset and model is rejected") {
  Dataset ds = synthetic_dataset(4, 1, 0, 8, 8, 9);
  UNetConfig cfg = tiny_model(false);
  cfg.in_channels = 5;
  UNet<float> net(cfg);
  CHECK_THROWS_AS(train(net, ds, quick(1)), ConfigError);
}
