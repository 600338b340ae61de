#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"
#include "texflow/io/binary.hpp"

namespace texflow::sim {

// Macroscopic state captured at one timestep. Velocities are the
// force-corrected (U, V); solid nodes carry U = V = 0. Values are stored in
// 32-bit precision, matching the on-disk format exactly.
struct FlowSnapshot {
  int64_t t = 0;
  Grid2D<float> rho, p, U, V;
  Grid2D<uint8_t> mask;  // 1 = solid

  int height() const { return rho.height(); }
  int width() const { return rho.width(); }

  bool operator==(const FlowSnapshot&) const = default;
};

namespace txfs {

inline constexpr char kMagic[4] = {'T', 'X', 'F', 'S'};
inline constexpr uint16_t kVersion = 1;

inline void write_field(std::ostream& os, const std::string& name,
                        const float* data, size_t n) {
  if (name.size() > 255) throw IoError("txfs: field name too long");
  io::write_le<uint8_t>(os, static_cast<uint8_t>(name.size()));
  io::write_bytes(os, name.data(), name.size());
  io::write_bytes(os, data, n * sizeof(float));
}

}  // namespace txfs

// Snapshot file: magic "TXFS", version u16, H u32, W u32, t u64,
// field-count u8, then named field blocks of H*W little-endian f32,
// row-major. The solid mask rides along as a 0/1 field.
inline void write_snapshot(const FlowSnapshot& snap, const std::string& path) {
  auto os = io::open_out(path);
  io::write_bytes(os, txfs::kMagic, 4);
  io::write_le<uint16_t>(os, txfs::kVersion);
  io::write_le<uint32_t>(os, static_cast<uint32_t>(snap.height()));
  io::write_le<uint32_t>(os, static_cast<uint32_t>(snap.width()));
  io::write_le<uint64_t>(os, static_cast<uint64_t>(snap.t));
  io::write_le<uint8_t>(os, 5);
  const size_t n = snap.rho.size();
  txfs::write_field(os, "rho", snap.rho.data(), n);
  txfs::write_field(os, "p", snap.p.data(), n);
  txfs::write_field(os, "U", snap.U.data(), n);
  txfs::write_field(os, "V", snap.V.data(), n);
  std::vector<float> m(n);
  for (size_t i = 0; i < n; ++i) m[i] = snap.mask.data()[i] ? 1.0f : 0.0f;
  txfs::write_field(os, "mask", m.data(), n);
  if (!os) throw IoError("txfs: write failed: " + path);
}

// Generic named-field reader; also usable for prediction/error-map files
// written in the same container format.
struct FieldFile {
  int64_t t = 0;
  int height = 0;
  int width = 0;
  std::vector<std::pair<std::string, Grid2D<float>>> fields;

  const Grid2D<float>* find(const std::string& name) const {
    for (const auto& [n, g] : fields) {
      if (n == name) return &g;
    }
    return nullptr;
  }
};

inline FieldFile read_field_file(const std::string& path) {
  auto is = io::open_in(path);
  char magic[4];
  io::read_bytes(is, magic, 4);
  if (std::string(magic, 4) != "TXFS") {
    throw IoError("txfs: bad magic in " + path);
  }
  const auto version = io::read_le<uint16_t>(is);
  if (version != txfs::kVersion) {
    throw IoError("txfs: unsupported version in " + path);
  }
  FieldFile out;
  out.height = static_cast<int>(io::read_le<uint32_t>(is));
  out.width = static_cast<int>(io::read_le<uint32_t>(is));
  out.t = static_cast<int64_t>(io::read_le<uint64_t>(is));
  const int count = io::read_le<uint8_t>(is);
  const size_t n = static_cast<size_t>(out.height) * out.width;
  for (int k = 0; k < count; ++k) {
    const int len = io::read_le<uint8_t>(is);
    std::string name(static_cast<size_t>(len), '\0');
    io::read_bytes(is, name.data(), name.size());
    Grid2D<float> g(out.height, out.width);
    io::read_bytes(is, g.data(), n * sizeof(float));
    out.fields.emplace_back(std::move(name), std::move(g));
  }
  return out;
}

inline FlowSnapshot read_snapshot(const std::string& path) {
  FieldFile ff = read_field_file(path);
  auto need = [&](const char* name) -> Grid2D<float> {
    const Grid2D<float>* g = ff.find(name);
    if (!g) throw IoError(std::string("txfs: missing field '") + name +
                          "' in " + path);
    return *g;
  };
  FlowSnapshot snap;
  snap.t = ff.t;
  snap.rho = need("rho");
  snap.p = need("p");
  snap.U = need("U");
  snap.V = need("V");
  Grid2D<float> m = need("mask");
  snap.mask = Grid2D<uint8_t>(ff.height, ff.width);
  for (size_t i = 0; i < m.size(); ++i) {
    snap.mask.data()[i] = m.data()[i] != 0.0f ? 1 : 0;
  }
  return snap;
}

// Writes an arbitrary named-field file in the snapshot container format.
inline void write_field_file(const FieldFile& ff, const std::string& path) {
  auto os = io::open_out(path);
  io::write_bytes(os, txfs::kMagic, 4);
  io::write_le<uint16_t>(os, txfs::kVersion);
  io::write_le<uint32_t>(os, static_cast<uint32_t>(ff.height));
  io::write_le<uint32_t>(os, static_cast<uint32_t>(ff.width));
  io::write_le<uint64_t>(os, static_cast<uint64_t>(ff.t));
  io::write_le<uint8_t>(os, static_cast<uint8_t>(ff.fields.size()));
  for (const auto& [name, grid] : ff.fields) {
    txfs::write_field(os, name, grid.data(), grid.size());
  }
  if (!os) throw IoError("txfs: write failed: " + path);
}

}  // namespace texflow::sim
