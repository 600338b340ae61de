// texflow: simulate textured-microchannel flow, build datasets, train and
// evaluate U-Net velocity regressors, and render fields.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "texflow/texflow.hpp"

namespace fs = std::filesystem;
using namespace texflow;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string preset = "desk";
  int64_t seed_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_out = true) {
  cmd->add_option("-c,--config", opts.config_path,
                  "JSON config file (defaults from the preset)");
  auto* o = cmd->add_option("-o,--out", opts.out_dir, "output directory");
  if (need_out) o->required();
  cmd->add_option("--preset", opts.preset,
                  "base defaults: desk (64x256) or paper (100x1000)");
  cmd->add_option("--seed", opts.seed_override,
                  "global seed (overrides the config file)");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg = RunConfig::load(opts.config_path, opts.preset);
  if (opts.seed_override >= 0) {
    cfg.seed = static_cast<uint64_t>(opts.seed_override);
    cfg.resolve_seeds();
  }
  cfg.validate();
  return cfg;
}

int cmd_simulate(const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  fs::create_directories(opts.out_dir);
  cfg.echo_to((fs::path(opts.out_dir) / "config.json").string());
  const std::string run_id = cfg.hash();
  std::printf("simulate: %dx%d grid, tau=%.3f, %lld steps -> %s\n",
              cfg.simulation.channel.height, cfg.simulation.channel.length,
              cfg.simulation.tau,
              static_cast<long long>(cfg.simulation.n_steps),
              opts.out_dir.c_str());
  const sim::RunManifest m =
      sim::run_to_dir(cfg.simulation, opts.out_dir, run_id);
  std::printf("simulate: %zu snapshots, %.3f ms/step%s\n",
              m.snapshots.size(), m.wall_ms_per_step,
              m.low_mach_warning
                  ? " (warning: |u| exceeded 0.3 c_s; low-Mach assumption "
                    "strained)"
                  : "");
  return kExitOk;
}

int cmd_dataset(const std::vector<std::string>& run_dirs,
                const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  std::vector<std::vector<sim::FlowSnapshot>> all;
  std::vector<std::pair<std::string, const std::vector<sim::FlowSnapshot>*>>
      runs;
  all.reserve(run_dirs.size());
  for (const auto& dir : run_dirs) {
    const sim::RunManifest m =
        sim::read_manifest((fs::path(dir) / "manifest").string());
    all.push_back(data::load_run_snapshots(dir));
    runs.emplace_back(m.run_id.empty() ? dir : m.run_id, &all.back());
    std::printf("dataset: loaded %zu snapshots from %s\n", all.back().size(),
                dir.c_str());
  }
  const data::Dataset ds = data::build_dataset(runs, cfg.dataset, cfg.seed);
  fs::create_directories(opts.out_dir);
  cfg.echo_to((fs::path(opts.out_dir) / "config.json").string());
  data::write_dataset(ds, opts.out_dir);
  const auto tr = ds.indices(data::Split::kTrain).size();
  const auto va = ds.indices(data::Split::kVal).size();
  const auto te = ds.indices(data::Split::kTest).size();
  std::printf("dataset: %zu samples (%zu/%zu/%zu train/val/test)%s -> %s\n",
              ds.samples.size(), tr, va, te,
              ds.clamped ? ", clamping occurred outside the train range" : "",
              opts.out_dir.c_str());
  return kExitOk;
}

int cmd_train(const std::string& dataset_dir, bool attention,
              const CommonOpts& opts) {
  RunConfig cfg = resolve_config(opts);
  if (attention) cfg.model.attention = true;
  const data::Dataset ds = data::read_dataset(dataset_dir);
  fs::create_directories(opts.out_dir);
  cfg.echo_to((fs::path(opts.out_dir) / "config.json").string());

  model::UNet<float> net(cfg.model);
  std::printf("train: %s U-Net, base=%d depth=%d, %zu parameters, %d "
              "epochs\n",
              cfg.model.attention ? "attention" : "standard",
              cfg.model.base_filters, cfg.model.depth,
              net.params().total_values(), cfg.training.epochs);

  const int cadence = cfg.training.checkpoint_cadence;
  auto on_epoch = [&](int epoch, const nn::ParameterStore<float>& params) {
    if (cadence > 0 && epoch % cadence == 0) {
      char name[48];
      std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.txfw", epoch);
      nn::save_checkpoint(params, (fs::path(opts.out_dir) / name).string());
    }
    if (epoch == 1 || epoch % 10 == 0) {
      std::printf("  epoch %d done\n", epoch);
      std::fflush(stdout);
    }
  };
  model::TrainResult<float> result =
      model::train<float>(net, ds, cfg.training, on_epoch);

  net.params().restore_values(result.best_params);
  nn::save_checkpoint(net.params(),
                      (fs::path(opts.out_dir) / "checkpoint.txfw").string());
  result.report.write_csv((fs::path(opts.out_dir) / "report.csv").string());
  result.report.write_text((fs::path(opts.out_dir) / "report.txt").string());
  std::printf("train: best epoch %d (val loss %.6g), %.1f s -> %s\n",
              result.report.best_epoch, result.report.best_val,
              result.report.wall_seconds, opts.out_dir.c_str());
  return kExitOk;
}

model::UNet<float> load_model(const std::string& checkpoint) {
  const auto entries = nn::read_checkpoint(checkpoint);
  model::UNetConfig mc = model::UNet<float>::infer_config(entries);
  model::UNet<float> net(mc);
  nn::load_checkpoint(net.params(), checkpoint);
  return net;
}

data::Split parse_split(const std::string& s) {
  if (s == "all") {
    throw ConfigError("split 'all' is only valid where stated");
  }
  return data::split_from_name(s);
}

// Groups sample indices of one split by (run, t).
std::map<std::pair<std::string, int64_t>, std::vector<size_t>> group_samples(
    const data::Dataset& ds, data::Split split) {
  std::map<std::pair<std::string, int64_t>, std::vector<size_t>> groups;
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    if (ds.samples[i].split != split) continue;
    groups[{ds.samples[i].ref.run_id, ds.samples[i].ref.t}].push_back(i);
  }
  return groups;
}

int cmd_predict(const std::string& dataset_dir, const std::string& checkpoint,
                const std::string& split_name, const CommonOpts& opts) {
  const data::Dataset ds = data::read_dataset(dataset_dir);
  model::UNet<float> net = load_model(checkpoint);
  fs::create_directories(opts.out_dir);
  const data::Split split = parse_split(split_name);
  size_t files = 0;
  for (const auto& [key, idxs] : group_samples(ds, split)) {
    std::vector<const data::Sample*> group;
    std::vector<nn::Tensor<float>> preds;
    for (size_t i : idxs) {
      group.push_back(&ds.samples[i]);
      preds.push_back(model::predict_denormalized(net, ds.samples[i],
                                                  ds.stats));
    }
    const model::AssembledField f = model::assemble_patches(group, preds);
    sim::FieldFile ff;
    ff.t = f.t;
    ff.height = f.u.height();
    ff.width = f.u.width();
    Grid2D<float> cov(f.coverage.height(), f.coverage.width());
    for (size_t i = 0; i < cov.size(); ++i) cov.data()[i] = f.coverage.data()[i];
    ff.fields = {{"U", f.u}, {"V", f.v}, {"coverage", cov}};
    char name[64];
    std::snprintf(name, sizeof(name), "pred_t%08lld.txfs",
                  static_cast<long long>(f.t));
    sim::write_field_file(ff, (fs::path(opts.out_dir) / name).string());
    ++files;
  }
  std::printf("predict: wrote %zu field files (%s split) -> %s\n", files,
              split_name.c_str(), opts.out_dir.c_str());
  return kExitOk;
}

int cmd_evaluate(const std::string& dataset_dir,
                 const std::vector<std::string>& checkpoints, bool normalized,
                 bool error_maps, const CommonOpts& opts) {
  const data::Dataset ds = data::read_dataset(dataset_dir);
  fs::create_directories(opts.out_dir);
  const auto test_idx = ds.indices(data::Split::kTest);
  if (test_idx.empty()) throw ConfigError("evaluate: empty test split");
  const int cin = ds.input_channels();

  std::vector<eval::MetricsReport> reports;
  std::ofstream csv((fs::path(opts.out_dir) / "metrics.csv").string());
  csv << eval::MetricsReport::csv_header() << "\n";

  for (const auto& ckpt : checkpoints) {
    model::UNet<float> net = load_model(ckpt);
    const std::string label =
        fs::path(ckpt).parent_path().filename().string() + "/" +
        fs::path(ckpt).stem().string() +
        (net.config().attention ? " (attention)" : " (standard)");
    std::vector<double> yu, yu_hat, yv, yv_hat;
    for (size_t i : test_idx) {
      const data::Sample& s = ds.samples[i];
      nn::Tensor<float> pred = normalized
                                   ? model::predict_normalized(net, s)
                                   : model::predict_denormalized(net, s,
                                                                 ds.stats);
      nn::Tensor<float> truth = s.target;
      if (!normalized) data::denormalize(truth, ds.stats, cin);
      const int H = truth.dim(1), W = truth.dim(2);
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
          if (s.mask.at(y, x)) continue;  // solid nodes excluded
          yu.push_back(truth.at(0, y, x));
          yu_hat.push_back(pred.at(0, y, x));
          yv.push_back(truth.at(1, y, x));
          yv_hat.push_back(pred.at(1, y, x));
        }
      }
    }
    reports.push_back(eval::MetricsReport::compute(yu, yu_hat, yv, yv_hat,
                                                   !normalized, label));
    csv << reports.back().csv_row() << "\n";

    if (error_maps) {
      for (const auto& [key, idxs] : group_samples(ds, data::Split::kTest)) {
        std::vector<const data::Sample*> group;
        std::vector<nn::Tensor<float>> preds;
        for (size_t i : idxs) {
          group.push_back(&ds.samples[i]);
          preds.push_back(model::predict_denormalized(net, ds.samples[i],
                                                      ds.stats));
        }
        const model::AssembledField f = model::assemble_patches(group, preds);
        Grid2D<float> true_u(f.u.height(), f.u.width(), 0.0f);
        Grid2D<float> true_v(f.u.height(), f.u.width(), 0.0f);
        for (const auto* s : group) {
          nn::Tensor<float> tgt = s->target;
          data::denormalize(tgt, ds.stats, cin);
          for (int y = 0; y < tgt.dim(1); ++y) {
            for (int x = 0; x < tgt.dim(2); ++x) {
              true_u.at(y, s->ref.x0 + x) = tgt.at(0, y, x);
              true_v.at(y, s->ref.x0 + x) = tgt.at(1, y, x);
            }
          }
        }
        sim::FieldFile ff;
        ff.t = f.t;
        ff.height = f.u.height();
        ff.width = f.u.width();
        ff.fields = {{"err_U", eval::error_map(true_u, f.u, &f.mask)},
                     {"err_V", eval::error_map(true_v, f.v, &f.mask)}};
        char name[96];
        std::snprintf(name, sizeof(name), "errmap_%zu_t%08lld.txfs",
                      reports.size() - 1, static_cast<long long>(f.t));
        sim::write_field_file(ff, (fs::path(opts.out_dir) / name).string());
      }
    }
  }

  std::ofstream txt((fs::path(opts.out_dir) / "metrics.txt").string());
  for (const auto& r : reports) r.write_text(txt);
  if (reports.size() > 1) {
    // Four-metric comparison table, one column per model.
    auto row = [&](const char* name, auto get) {
      txt << "  " << name;
      std::printf("  %-6s", name);
      for (const auto& r : reports) {
        txt << "\t" << get(r);
        std::printf("  %12.6g", get(r));
      }
      txt << "\n";
      std::printf("\n");
    };
    txt << "comparison (pooled over u and v):\n";
    std::printf("comparison (pooled over u and v):\n");
    row("MAE", [](const eval::MetricsReport& r) { return r.mae_all; });
    row("MSE", [](const eval::MetricsReport& r) { return r.mse_all; });
    row("RMSE", [](const eval::MetricsReport& r) { return r.rmse_all; });
    row("R2", [](const eval::MetricsReport& r) { return r.r2_all; });
  }
  for (const auto& r : reports) r.write_text(std::cout);
  std::printf("evaluate: wrote metrics for %zu checkpoint(s) -> %s\n",
              reports.size(), opts.out_dir.c_str());
  return kExitOk;
}

int cmd_render(const std::vector<std::string>& field_files,
               std::vector<double> x_over_l, const CommonOpts& opts) {
  if (x_over_l.empty()) x_over_l = {0.3, 0.8};
  fs::create_directories(opts.out_dir);
  for (const auto& path : field_files) {
    const sim::FieldFile ff = sim::read_field_file(path);
    const std::string stem = fs::path(path).stem().string();
    for (const auto& [name, grid] : ff.fields) {
      const std::string base =
          (fs::path(opts.out_dir) / (stem + "_" + name)).string();
      io::write_heatmap_ppm(grid, base + ".ppm");
      for (double frac : x_over_l) {
        if (!(frac >= 0.0 && frac <= 1.0)) {
          throw ConfigError("render: --x-over-l must lie in [0, 1]");
        }
        const int W = grid.width();
        const int col = std::clamp(
            static_cast<int>(std::lround(frac * W)), 0, W - 1);
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_x%.2f.csv", frac);
        std::ofstream os(base + suffix);
        if (!os) throw IoError("cannot write profile csv");
        os << "y, " << name << "\n";
        for (int y = 0; y < grid.height(); ++y) {
          os << y << ", " << grid.at(y, col) << "\n";
        }
      }
    }
    std::printf("render: %s (%zu fields)\n", path.c_str(), ff.fields.size());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"texflow: lattice Boltzmann textured-microchannel flows and "
               "U-Net velocity-field regression"};
  app.require_subcommand(1);

  CommonOpts sim_opts, ds_opts, train_opts, pred_opts, eval_opts, render_opts;
  std::vector<std::string> run_dirs, field_files, checkpoints;
  std::string dataset_dir, checkpoint, split = "test";
  bool attention = false, normalized = false, no_error_maps = false;
  std::vector<double> x_over_l;

  auto* c_sim = app.add_subcommand("simulate", "run the LBM solver");
  add_common(c_sim, sim_opts);

  auto* c_ds = app.add_subcommand("dataset",
                                  "build a supervised dataset from runs");
  c_ds->add_option("runs", run_dirs, "simulation run directories")
      ->required();
  add_common(c_ds, ds_opts);

  auto* c_train = app.add_subcommand("train", "train a U-Net regressor");
  c_train->add_option("dataset", dataset_dir, "dataset directory")->required();
  c_train->add_flag("--attention", attention,
                    "attention-gated skip connections");
  add_common(c_train, train_opts);

  auto* c_pred = app.add_subcommand("predict", "predict velocity fields");
  c_pred->add_option("dataset", dataset_dir, "dataset directory")->required();
  c_pred->add_option("--checkpoint", checkpoint, "trained checkpoint")
      ->required();
  c_pred->add_option("--split", split, "train, val, or test (default test)");
  add_common(c_pred, pred_opts);

  auto* c_eval = app.add_subcommand("evaluate",
                                    "score checkpoints on the test split");
  c_eval->add_option("dataset", dataset_dir, "dataset directory")->required();
  c_eval->add_option("--checkpoint", checkpoints, "checkpoint(s) to compare")
      ->required();
  c_eval->add_flag("--normalized", normalized,
                   "report metrics in normalized units");
  c_eval->add_flag("--no-error-maps", no_error_maps,
                   "skip error-map field files");
  add_common(c_eval, eval_opts);

  auto* c_render = app.add_subcommand("render",
                                      "field files to heatmaps + profiles");
  c_render->add_option("fields", field_files, "TXFS field files")->required();
  c_render->add_option("--x-over-l", x_over_l,
                       "profile stations as fractions of length "
                       "(default 0.3 0.8)");
  add_common(c_render, render_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(sim_opts);
    if (c_ds->parsed()) return cmd_dataset(run_dirs, ds_opts);
    if (c_train->parsed()) return cmd_train(dataset_dir, attention, train_opts);
    if (c_pred->parsed()) return cmd_predict(dataset_dir, checkpoint, split,
                                             pred_opts);
    if (c_eval->parsed()) {
      return cmd_evaluate(dataset_dir, checkpoints, normalized, !no_error_maps,
                          eval_opts);
    }
    if (c_render->parsed()) return cmd_render(field_files, x_over_l,
                                              render_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error (divergence): %s\n", e.what());
    return kExitDivergence;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error (i/o): %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
