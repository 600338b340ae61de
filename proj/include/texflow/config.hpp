#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "texflow/common.hpp"
#include "texflow/data/dataset.hpp"
#include "texflow/model/train.hpp"
#include "texflow/model/unet.hpp"
#include "texflow/rng.hpp"
#include "texflow/sim/config.hpp"

namespace texflow {

// One structured config file drives every pipeline stage. Unknown keys are
// rejected; every field has a default from the chosen preset. The fully
// resolved config is echoed into each output directory.
struct RunConfig {
  uint64_t seed = 42;
  sim::SimulationConfig simulation;  // holds the channel + boundary specs
  data::DatasetPolicy dataset;
  model::UNetConfig model;
  model::TrainConfig training;

  // desk: 64 x 256 grid and a small filter ladder, sized for CPU runs.
  // paper: 100 x 1000 grid with the full 64-base ladder.
  static RunConfig preset(const std::string& name) {
    RunConfig cfg;
    if (name == "desk" || name.empty()) {
      cfg.simulation.channel = {256, 64, 8, 16, 48, 16};
      cfg.model.base_filters = 8;
      cfg.model.depth = 3;
      cfg.simulation.n_steps = 2000;
    } else if (name == "paper") {
      cfg.simulation.channel = {1000, 100, 12, 24, 72, 24};
      cfg.model.base_filters = 64;
      cfg.model.depth = 4;
      cfg.simulation.n_steps = 1000;
    } else {
      throw ConfigError("unknown preset: " + name + " (desk or paper)");
    }
    cfg.resolve_seeds();
    return cfg;
  }

  // Derives per-module seed streams from the global seed.
  void resolve_seeds() {
    simulation.seed = seed;
    model.seed = derive_seed(seed, 'M');
    training.shuffle_seed = derive_seed(seed, 'T');
  }

  void validate() const {
    simulation.validate();
    dataset.validate();
    model.validate();
    training.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["channel"] = {{"length", simulation.channel.length},
                    {"height", simulation.channel.height},
                    {"texture_height", simulation.channel.texture_height},
                    {"texture_width", simulation.channel.texture_width},
                    {"texture_spacing", simulation.channel.texture_spacing},
                    {"texture_offset", simulation.channel.texture_offset}};
    j["boundary"] = {{"inlet_velocity", simulation.boundary.inlet_velocity},
                     {"outlet_density", simulation.boundary.outlet_density}};
    j["simulation"] = {{"tau", simulation.tau},
                       {"force", simulation.force},
                       {"n_steps", simulation.n_steps},
                       {"snapshot_stride", simulation.snapshot_stride},
                       {"periodic_x", simulation.periodic_x}};
    j["dataset"] = {{"train_frac", dataset.train_frac},
                    {"val_frac", dataset.val_frac},
                    {"include_mask_channel", dataset.include_mask_channel}};
    if (!dataset.ranges.empty()) j["dataset"]["ranges"] = dataset.ranges;
    j["model"] = {{"in_channels", model.in_channels},
                  {"out_channels", model.out_channels},
                  {"base_filters", model.base_filters},
                  {"depth", model.depth},
                  {"attention", model.attention},
                  {"dropout_rate", model.dropout_rate}};
    j["training"] = {{"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"epochs", training.epochs},
                     {"checkpoint_cadence", training.checkpoint_cadence},
                     {"threads", training.threads}};
    return j;
  }

  void apply_json(const nlohmann::json& j) {
    auto get = [](const nlohmann::json& obj, const char* section,
                  auto apply_key) {
      for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!apply_key(it.key(), it.value())) {
          throw ConfigError(std::string("config: unknown key '") + it.key() +
                            "' in " + section);
        }
      }
    };
    get(j, "top level", [&](const std::string& k, const nlohmann::json& v) {
      if (k == "seed") {
        seed = v.get<uint64_t>();
      } else if (k == "channel") {
        get(v, "channel", [&](const std::string& kk, const nlohmann::json& vv) {
          auto& c = simulation.channel;
          if (kk == "length") c.length = vv.get<int>();
          else if (kk == "height") c.height = vv.get<int>();
          else if (kk == "texture_height") c.texture_height = vv.get<int>();
          else if (kk == "texture_width") c.texture_width = vv.get<int>();
          else if (kk == "texture_spacing") c.texture_spacing = vv.get<int>();
          else if (kk == "texture_offset") c.texture_offset = vv.get<int>();
          else return false;
          return true;
        });
      } else if (k == "boundary") {
        get(v, "boundary", [&](const std::string& kk, const nlohmann::json& vv) {
          if (kk == "inlet_velocity") {
            simulation.boundary.inlet_velocity = vv.get<double>();
          } else if (kk == "outlet_density") {
            simulation.boundary.outlet_density = vv.get<double>();
          } else {
            return false;
          }
          return true;
        });
      } else if (k == "simulation") {
        get(v, "simulation", [&](const std::string& kk, const nlohmann::json& vv) {
          if (kk == "tau") simulation.tau = vv.get<double>();
          else if (kk == "force") simulation.force = vv.get<std::array<double, 2>>();
          else if (kk == "n_steps") simulation.n_steps = vv.get<long long>();
          else if (kk == "snapshot_stride") simulation.snapshot_stride = vv.get<long long>();
          else if (kk == "periodic_x") simulation.periodic_x = vv.get<bool>();
          else return false;
          return true;
        });
      } else if (k == "dataset") {
        get(v, "dataset", [&](const std::string& kk, const nlohmann::json& vv) {
          if (kk == "train_frac") dataset.train_frac = vv.get<double>();
          else if (kk == "val_frac") dataset.val_frac = vv.get<double>();
          else if (kk == "include_mask_channel") dataset.include_mask_channel = vv.get<bool>();
          else if (kk == "ranges") dataset.ranges = vv.get<std::vector<std::pair<int, int>>>();
          else return false;
          return true;
        });
      } else if (k == "model") {
        get(v, "model", [&](const std::string& kk, const nlohmann::json& vv) {
          if (kk == "in_channels") model.in_channels = vv.get<int>();
          else if (kk == "out_channels") model.out_channels = vv.get<int>();
          else if (kk == "base_filters") model.base_filters = vv.get<int>();
          else if (kk == "depth") model.depth = vv.get<int>();
          else if (kk == "attention") model.attention = vv.get<bool>();
          else if (kk == "dropout_rate") model.dropout_rate = vv.get<double>();
          else return false;
          return true;
        });
      } else if (k == "training") {
        get(v, "training", [&](const std::string& kk, const nlohmann::json& vv) {
          if (kk == "batch_size") training.batch_size = vv.get<int>();
          else if (kk == "learning_rate") training.learning_rate = vv.get<double>();
          else if (kk == "epochs") training.epochs = vv.get<int>();
          else if (kk == "checkpoint_cadence") training.checkpoint_cadence = vv.get<int>();
          else if (kk == "threads") training.threads = vv.get<int>();
          else return false;
          return true;
        });
      } else {
        return false;
      }
      return true;
    });
    resolve_seeds();
  }

  static RunConfig load(const std::string& path,
                        const std::string& preset_name = "desk") {
    RunConfig cfg = preset(preset_name);
    if (!path.empty()) {
      std::ifstream is(path);
      if (!is) throw IoError("cannot open config file: " + path);
      nlohmann::json j;
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: parse error in " + path + ": " + e.what());
      }
      try {
        cfg.apply_json(j);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: bad value in " + path + ": " + e.what());
      }
    }
    return cfg;
  }

  void echo_to(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write config echo: " + path);
    os << to_json().dump(2) << "\n";
  }

  // FNV-1a of the resolved config text, used as the run id.
  std::string hash() const {
    const std::string s = to_json().dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
  }
};

}  // namespace texflow
