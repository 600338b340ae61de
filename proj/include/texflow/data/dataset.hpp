#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"
#include "texflow/io/binary.hpp"
#include "texflow/nn/tensor.hpp"
#include "texflow/sim/manifest.hpp"
#include "texflow/sim/snapshot.hpp"

namespace texflow::data {

enum class Split : uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

inline Split split_from_name(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw IoError("unknown split name: " + s);
}

// Per-channel min/max computed over the training split only. Channel order:
// the input channels (x, y, p, rho[, mask]) followed by the targets (u, v).
struct NormalizationStats {
  std::vector<std::string> channels;
  std::vector<float> mins, maxs;
  std::vector<uint8_t> constant;  // original max == min; max bumped by one

  int count() const { return static_cast<int>(channels.size()); }

  float normalize(int c, float v) const {
    return (v - mins[c]) / (maxs[c] - mins[c]);
  }
  float denormalize(int c, float v) const {
    return v * (maxs[c] - mins[c]) + mins[c];
  }

  bool operator==(const NormalizationStats&) const = default;
};

struct SampleRef {
  std::string run_id;
  int64_t t = 0;
  int x0 = 0, x1 = 0;  // [x0, x1) column range in the source field

  std::string key() const {
    return run_id + ":" + std::to_string(t) + ":" + std::to_string(x0) + "-" +
           std::to_string(x1);
  }
};

// One supervised example: normalized input channels against normalized
// velocity targets, spatially aligned; the solid-mask patch rides along for
// metric masking.
struct Sample {
  nn::Tensor<float> input;   // (C_in, H, w)
  nn::Tensor<float> target;  // (2, H, w)
  Grid2D<uint8_t> mask;      // 1 = solid
  SampleRef ref;
  Split split = Split::kTrain;
};

struct DatasetPolicy {
  // Empty = default: four windows of round(W/5) columns, mirroring the
  // 200-column windows used on a 1000-column grid.
  std::vector<std::pair<int, int>> ranges;
  double train_frac = 0.70;
  double val_frac = 0.15;
  bool include_mask_channel = false;

  void validate() const {
    if (!(train_frac > 0.0) || val_frac < 0.0 ||
        train_frac + val_frac > 1.0) {
      throw ConfigError("dataset: split fractions invalid");
    }
    for (const auto& [x0, x1] : ranges) {
      if (x0 < 0 || x1 <= x0) {
        throw ConfigError("dataset: malformed x-range");
      }
    }
  }
};

struct Dataset {
  std::vector<Sample> samples;
  NormalizationStats stats;
  uint64_t seed = 0;
  bool clamped = false;  // some val/test value left the train range

  std::vector<size_t> indices(Split s) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].split == s) out.push_back(i);
    }
    return out;
  }

  int input_channels() const {
    return samples.empty() ? 0 : samples.front().input.dim(0);
  }
};

inline std::vector<std::pair<int, int>> default_ranges(int width) {
  const int win = std::max(1, static_cast<int>(std::lround(width / 5.0)));
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < 4; ++k) {
    const int x0 = k * win;
    const int x1 = std::min((k + 1) * win, width);
    if (x0 >= width || x1 <= x0) break;
    out.emplace_back(x0, x1);
  }
  return out;
}

// Raw (unnormalized) patch cut from one snapshot: coordinate channels carry
// the global node indices so every patch knows its absolute position.
struct RawPatch {
  nn::Tensor<float> input;   // (4 or 5, H, w): x, y, p, rho[, mask]
  nn::Tensor<float> target;  // (2, H, w): U, V
  Grid2D<uint8_t> mask;
  SampleRef ref;
};

inline std::vector<RawPatch> segment(const sim::FlowSnapshot& snap,
                                     const std::vector<std::pair<int, int>>&
                                         ranges,
                                     bool include_mask_channel = false,
                                     const std::string& run_id = "") {
  const int H = snap.height();
  const int W = snap.width();
  std::vector<RawPatch> out;
  out.reserve(ranges.size());
  for (const auto& [x0, x1] : ranges) {
    if (x0 < 0 || x1 > W || x1 <= x0) {
      throw ConfigError("segment: x-range [" + std::to_string(x0) + ", " +
                        std::to_string(x1) + ") outside field of width " +
                        std::to_string(W));
    }
    const int w = x1 - x0;
    const int cin = include_mask_channel ? 5 : 4;
    RawPatch patch;
    patch.input = nn::Tensor<float>({cin, H, w});
    patch.target = nn::Tensor<float>({2, H, w});
    patch.mask = Grid2D<uint8_t>(H, w);
    patch.ref = SampleRef{run_id, snap.t, x0, x1};
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < w; ++j) {
        const int gx = x0 + j;
        patch.input.at(0, i, j) = static_cast<float>(gx);
        patch.input.at(1, i, j) = static_cast<float>(i);
        patch.input.at(2, i, j) = snap.p.at(i, gx);
        patch.input.at(3, i, j) = snap.rho.at(i, gx);
        if (include_mask_channel) {
          patch.input.at(4, i, j) = snap.mask.at(i, gx) ? 1.0f : 0.0f;
        }
        patch.target.at(0, i, j) = snap.U.at(i, gx);
        patch.target.at(1, i, j) = snap.V.at(i, gx);
        patch.mask.at(i, j) = snap.mask.at(i, gx);
      }
    }
    out.push_back(std::move(patch));
  }
  return out;
}

// v' = (v - min) / (max - min) per channel, clamped to [-0.05, 1.05];
// returns true when clamping occurred (val/test values can leave the train
// range). `first_channel` selects where this tensor's channels start inside
// the stats block.
inline bool normalize(nn::Tensor<float>& t, const NormalizationStats& stats,
                      int first_channel) {
  if (t.rank() != 3) throw ConfigError("normalize: rank-3 tensor expected");
  if (first_channel + t.dim(0) > stats.count()) {
    throw ConfigError("normalize: channel count mismatch: tensor needs " +
                      std::to_string(first_channel + t.dim(0)) +
                      " stats channels, have " +
                      std::to_string(stats.count()));
  }
  bool clamped = false;
  const size_t plane = static_cast<size_t>(t.dim(1)) * t.dim(2);
  for (int c = 0; c < t.dim(0); ++c) {
    float* p = t.data() + c * plane;
    for (size_t i = 0; i < plane; ++i) {
      float v = stats.normalize(first_channel + c, p[i]);
      if (v < -0.05f) {
        v = -0.05f;
        clamped = true;
      } else if (v > 1.05f) {
        v = 1.05f;
        clamped = true;
      }
      p[i] = v;
    }
  }
  return clamped;
}

inline void denormalize(nn::Tensor<float>& t, const NormalizationStats& stats,
                        int first_channel) {
  if (first_channel + t.dim(0) > stats.count()) {
    throw ConfigError("denormalize: channel count mismatch");
  }
  const size_t plane = static_cast<size_t>(t.dim(1)) * t.dim(2);
  for (int c = 0; c < t.dim(0); ++c) {
    float* p = t.data() + c * plane;
    for (size_t i = 0; i < plane; ++i) {
      p[i] = stats.denormalize(first_channel + c, p[i]);
    }
  }
}

// Samples ordered by (run, t, range). The split walks that order in
// contiguous blocks (train, then val, then test), so later-time samples
// never leak into training.
inline Dataset build_dataset(
    const std::vector<std::pair<std::string,
                                const std::vector<sim::FlowSnapshot>*>>& runs,
    const DatasetPolicy& policy, uint64_t seed) {
  policy.validate();
  Dataset ds;
  ds.seed = seed;

  std::vector<RawPatch> patches;
  for (const auto& [run_id, snaps] : runs) {
    if (!snaps || snaps->empty()) {
      throw ConfigError("build_dataset: empty run: " + run_id);
    }
    for (const auto& snap : *snaps) {
      const auto ranges = policy.ranges.empty()
                              ? default_ranges(snap.width())
                              : policy.ranges;
      auto cut = segment(snap, ranges, policy.include_mask_channel, run_id);
      for (auto& p : cut) patches.push_back(std::move(p));
    }
  }
  if (patches.empty()) throw ConfigError("build_dataset: no samples");

  const size_t n = patches.size();
  const size_t n_train = static_cast<size_t>(
      std::llround(policy.train_frac * static_cast<double>(n)));
  const size_t n_val = static_cast<size_t>(
      std::llround(policy.val_frac * static_cast<double>(n)));
  if (n_train == 0 || n_train + n_val > n) {
    throw ConfigError("build_dataset: split fractions leave no samples");
  }

  const int cin = patches.front().input.dim(0);
  NormalizationStats stats;
  stats.channels = {"x", "y", "p", "rho"};
  if (cin == 5) stats.channels.push_back("mask");
  stats.channels.push_back("u");
  stats.channels.push_back("v");
  const int n_ch = stats.count();
  stats.mins.assign(n_ch, std::numeric_limits<float>::infinity());
  stats.maxs.assign(n_ch, -std::numeric_limits<float>::infinity());
  stats.constant.assign(n_ch, 0);

  // Stats from the training block only.
  for (size_t s = 0; s < n_train; ++s) {
    const auto& p = patches[s];
    const size_t plane = static_cast<size_t>(p.input.dim(1)) * p.input.dim(2);
    for (int c = 0; c < cin; ++c) {
      const float* v = p.input.data() + c * plane;
      for (size_t i = 0; i < plane; ++i) {
        stats.mins[c] = std::min(stats.mins[c], v[i]);
        stats.maxs[c] = std::max(stats.maxs[c], v[i]);
      }
    }
    for (int c = 0; c < 2; ++c) {
      const float* v = p.target.data() + c * plane;
      for (size_t i = 0; i < plane; ++i) {
        stats.mins[cin + c] = std::min(stats.mins[cin + c], v[i]);
        stats.maxs[cin + c] = std::max(stats.maxs[cin + c], v[i]);
      }
    }
  }
  for (int c = 0; c < n_ch; ++c) {
    if (stats.maxs[c] == stats.mins[c]) {
      stats.maxs[c] = stats.mins[c] + 1.0f;
      stats.constant[c] = 1;
    }
  }

  ds.samples.reserve(n);
  for (size_t s = 0; s < n; ++s) {
    Sample smp;
    smp.input = std::move(patches[s].input);
    smp.target = std::move(patches[s].target);
    smp.mask = std::move(patches[s].mask);
    smp.ref = std::move(patches[s].ref);
    smp.split = s < n_train            ? Split::kTrain
                : s < n_train + n_val  ? Split::kVal
                                       : Split::kTest;
    const bool c1 = normalize(smp.input, stats, 0);
    const bool c2 = normalize(smp.target, stats, cin);
    if ((c1 || c2) && smp.split != Split::kTrain) ds.clamped = true;
    ds.samples.push_back(std::move(smp));
  }
  ds.stats = std::move(stats);
  return ds;
}

// --------------------------------------------------------------------------
// Dataset directory: `manifest` and `stats` as key: value text,
// `samples.bin` as [h u32, w u32, c u32, f32 data] input-then-target records,
// `masks.bin` as [h u32, w u32, u8 data] records aligned with samples.bin.
// --------------------------------------------------------------------------

namespace detail {
using sim::detail::fmt_f32;

inline void write_tensor_record(std::ostream& os,
                                const nn::Tensor<float>& t) {
  io::write_le<uint32_t>(os, static_cast<uint32_t>(t.dim(1)));
  io::write_le<uint32_t>(os, static_cast<uint32_t>(t.dim(2)));
  io::write_le<uint32_t>(os, static_cast<uint32_t>(t.dim(0)));
  io::write_bytes(os, t.data(), t.size() * sizeof(float));
}

inline nn::Tensor<float> read_tensor_record(std::istream& is) {
  const int h = static_cast<int>(io::read_le<uint32_t>(is));
  const int w = static_cast<int>(io::read_le<uint32_t>(is));
  const int c = static_cast<int>(io::read_le<uint32_t>(is));
  nn::Tensor<float> t({c, h, w});
  io::read_bytes(is, t.data(), t.size() * sizeof(float));
  return t;
}
}  // namespace detail

inline void write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream os((fs::path(dir) / "stats").string());
    if (!os) throw IoError("cannot write dataset stats");
    os << "texflow_stats: 1\n";
    for (int c = 0; c < ds.stats.count(); ++c) {
      os << "channel: " << ds.stats.channels[c] << ' '
         << detail::fmt_f32(ds.stats.mins[c]) << ' '
         << detail::fmt_f32(ds.stats.maxs[c]) << ' '
         << int(ds.stats.constant[c]) << '\n';
    }
  }
  {
    std::ofstream os((fs::path(dir) / "manifest").string());
    if (!os) throw IoError("cannot write dataset manifest");
    os << "texflow_dataset_manifest: 1\n";
    os << "seed: " << ds.seed << "\n";
    os << "clamped: " << (ds.clamped ? 1 : 0) << "\n";
    os << "sample_count: " << ds.samples.size() << "\n";
    os << "sample_columns: index run t x0 x1 split\n";
    for (size_t i = 0; i < ds.samples.size(); ++i) {
      const auto& s = ds.samples[i];
      os << "sample: " << i << ' '
         << (s.ref.run_id.empty() ? "-" : s.ref.run_id) << ' ' << s.ref.t
         << ' ' << s.ref.x0 << ' ' << s.ref.x1 << ' '
         << split_name(s.split) << '\n';
    }
  }
  {
    auto os = io::open_out((fs::path(dir) / "samples.bin").string());
    for (const auto& s : ds.samples) {
      detail::write_tensor_record(os, s.input);
      detail::write_tensor_record(os, s.target);
    }
  }
  {
    auto os = io::open_out((fs::path(dir) / "masks.bin").string());
    for (const auto& s : ds.samples) {
      io::write_le<uint32_t>(os, static_cast<uint32_t>(s.mask.height()));
      io::write_le<uint32_t>(os, static_cast<uint32_t>(s.mask.width()));
      io::write_bytes(os, s.mask.data(), s.mask.size());
    }
  }
}

inline Dataset read_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  {
    std::ifstream is((fs::path(dir) / "stats").string());
    if (!is) throw IoError("cannot read dataset stats in " + dir);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (line.rfind("texflow_stats:", 0) == 0) continue;
      if (line.rfind("channel: ", 0) != 0) {
        throw IoError("stats: malformed line: " + line);
      }
      std::istringstream ss(line.substr(9));
      std::string name;
      float mn, mx;
      int cflag;
      ss >> name >> mn >> mx >> cflag;
      if (!ss) throw IoError("stats: malformed line: " + line);
      ds.stats.channels.push_back(name);
      ds.stats.mins.push_back(mn);
      ds.stats.maxs.push_back(mx);
      ds.stats.constant.push_back(static_cast<uint8_t>(cflag));
    }
  }
  size_t sample_count = 0;
  std::vector<SampleRef> refs;
  std::vector<Split> splits;
  {
    std::ifstream is((fs::path(dir) / "manifest").string());
    if (!is) throw IoError("cannot read dataset manifest in " + dir);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (line.rfind("sample: ", 0) == 0) {
        std::istringstream ss(line.substr(8));
        size_t idx;
        SampleRef ref;
        std::string split;
        ss >> idx >> ref.run_id >> ref.t >> ref.x0 >> ref.x1 >> split;
        if (!ss) throw IoError("dataset manifest: malformed row: " + line);
        if (ref.run_id == "-") ref.run_id.clear();
        refs.push_back(std::move(ref));
        splits.push_back(split_from_name(split));
      } else if (line.rfind("seed: ", 0) == 0) {
        ds.seed = std::stoull(line.substr(6));
      } else if (line.rfind("clamped: ", 0) == 0) {
        ds.clamped = line.substr(9) == "1";
      } else if (line.rfind("sample_count: ", 0) == 0) {
        sample_count = std::stoull(line.substr(14));
      } else if (line.rfind("texflow_dataset_manifest:", 0) == 0 ||
                 line.rfind("sample_columns:", 0) == 0) {
        // header lines
      } else {
        throw IoError("dataset manifest: unknown line: " + line);
      }
    }
  }
  if (refs.size() != sample_count) {
    throw IoError("dataset manifest: sample count mismatch");
  }
  {
    auto is = io::open_in((fs::path(dir) / "samples.bin").string());
    auto ms = io::open_in((fs::path(dir) / "masks.bin").string());
    ds.samples.resize(sample_count);
    for (size_t i = 0; i < sample_count; ++i) {
      ds.samples[i].input = detail::read_tensor_record(is);
      ds.samples[i].target = detail::read_tensor_record(is);
      const int h = static_cast<int>(io::read_le<uint32_t>(ms));
      const int w = static_cast<int>(io::read_le<uint32_t>(ms));
      ds.samples[i].mask = Grid2D<uint8_t>(h, w);
      io::read_bytes(ms, ds.samples[i].mask.data(), ds.samples[i].mask.size());
      ds.samples[i].ref = refs[i];
      ds.samples[i].split = splits[i];
    }
  }
  return ds;
}

// Loads the snapshots listed in a run directory's manifest.
inline std::vector<sim::FlowSnapshot> load_run_snapshots(
    const std::string& dir) {
  namespace fs = std::filesystem;
  const sim::RunManifest m =
      sim::read_manifest((fs::path(dir) / "manifest").string());
  std::vector<sim::FlowSnapshot> snaps;
  snaps.reserve(m.snapshots.size());
  for (const auto& rec : m.snapshots) {
    snaps.push_back(sim::read_snapshot((fs::path(dir) / rec.path).string()));
  }
  return snaps;
}

}  // namespace texflow::data
