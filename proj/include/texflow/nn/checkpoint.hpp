#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "texflow/io/binary.hpp"
#include "texflow/nn/params.hpp"
#include "texflow/nn/tensor.hpp"

namespace texflow::nn {

// Parameter checkpoint: magic "TXFW", version u16, count u32, then per
// parameter: name length u16 + bytes, rank u8, extents u32 each, f32 LE
// data. Storage is 32-bit regardless of the in-memory scalar type.
namespace txfw {
inline constexpr char kMagic[4] = {'T', 'X', 'F', 'W'};
inline constexpr uint16_t kVersion = 1;
}  // namespace txfw

struct CheckpointEntry {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

inline void write_checkpoint(const std::vector<CheckpointEntry>& entries,
                             const std::string& path) {
  auto os = io::open_out(path);
  io::write_bytes(os, txfw::kMagic, 4);
  io::write_le<uint16_t>(os, txfw::kVersion);
  io::write_le<uint32_t>(os, static_cast<uint32_t>(entries.size()));
  for (const auto& e : entries) {
    io::write_le<uint16_t>(os, static_cast<uint16_t>(e.name.size()));
    io::write_bytes(os, e.name.data(), e.name.size());
    io::write_le<uint8_t>(os, static_cast<uint8_t>(e.shape.size()));
    for (int d : e.shape) io::write_le<uint32_t>(os, static_cast<uint32_t>(d));
    io::write_bytes(os, e.data.data(), e.data.size() * sizeof(float));
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

inline std::vector<CheckpointEntry> read_checkpoint(const std::string& path) {
  auto is = io::open_in(path);
  char magic[4];
  io::read_bytes(is, magic, 4);
  if (std::string(magic, 4) != "TXFW") {
    throw IoError("checkpoint: bad magic in " + path);
  }
  if (io::read_le<uint16_t>(is) != txfw::kVersion) {
    throw IoError("checkpoint: unsupported version in " + path);
  }
  const uint32_t count = io::read_le<uint32_t>(is);
  std::vector<CheckpointEntry> entries(count);
  for (auto& e : entries) {
    const uint16_t len = io::read_le<uint16_t>(is);
    e.name.resize(len);
    io::read_bytes(is, e.name.data(), len);
    const uint8_t rank = io::read_le<uint8_t>(is);
    size_t n = 1;
    e.shape.resize(rank);
    for (int i = 0; i < rank; ++i) {
      e.shape[i] = static_cast<int>(io::read_le<uint32_t>(is));
      n *= static_cast<size_t>(e.shape[i]);
    }
    e.data.resize(n);
    io::read_bytes(is, e.data.data(), n * sizeof(float));
  }
  return entries;
}

template <typename T>
std::vector<CheckpointEntry> to_entries(const ParameterStore<T>& params) {
  std::vector<CheckpointEntry> out;
  out.reserve(params.count());
  for (size_t i = 0; i < params.count(); ++i) {
    const auto& e = params.entry(i);
    CheckpointEntry ce;
    ce.name = e.name;
    ce.shape = e.value.shape();
    ce.data.resize(e.value.size());
    for (size_t j = 0; j < ce.data.size(); ++j) {
      ce.data[j] = static_cast<float>(e.value[j]);
    }
    out.push_back(std::move(ce));
  }
  return out;
}

template <typename T>
void save_checkpoint(const ParameterStore<T>& params,
                     const std::string& path) {
  write_checkpoint(to_entries(params), path);
}

template <typename T>
void load_checkpoint(ParameterStore<T>& params, const std::string& path) {
  const auto entries = read_checkpoint(path);
  if (entries.size() != params.count()) {
    throw IoError("checkpoint: parameter count mismatch in " + path);
  }
  for (const auto& ce : entries) {
    auto* e = params.find(ce.name);
    if (!e || e->value.shape() != ce.shape) {
      throw IoError("checkpoint: no matching parameter for " + ce.name);
    }
    for (size_t j = 0; j < ce.data.size(); ++j) {
      e->value[j] = static_cast<T>(ce.data[j]);
    }
  }
}

}  // namespace texflow::nn
