#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/sim/snapshot.hpp"

namespace texflow::sim {

struct SnapshotRecord {
  int64_t t = 0;
  std::string path;  // relative to the run directory
  float rho_min = 0, rho_max = 0;
  float p_min = 0, p_max = 0;
  float U_min = 0, U_max = 0;
  float V_min = 0, V_max = 0;
};

// Key: value lines plus one snapshot table row per capture. Timestamps and
// timings live here and only here; everything else in a run directory is
// deterministic.
struct RunManifest {
  std::string run_id;
  std::string config_file = "config.json";
  int grid_height = 0;
  int grid_width = 0;
  double wall_ms_per_step = 0.0;
  bool low_mach_warning = false;
  std::vector<SnapshotRecord> snapshots;
};

namespace detail {

inline std::string fmt_f32(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

inline void field_min_max(const Grid2D<float>& g, float& mn, float& mx) {
  mn = g.data()[0];
  mx = g.data()[0];
  for (size_t i = 1; i < g.size(); ++i) {
    mn = std::min(mn, g.data()[i]);
    mx = std::max(mx, g.data()[i]);
  }
}

}  // namespace detail

inline SnapshotRecord make_record(const FlowSnapshot& snap,
                                  const std::string& rel_path) {
  SnapshotRecord r;
  r.t = snap.t;
  r.path = rel_path;
  detail::field_min_max(snap.rho, r.rho_min, r.rho_max);
  detail::field_min_max(snap.p, r.p_min, r.p_max);
  detail::field_min_max(snap.U, r.U_min, r.U_max);
  detail::field_min_max(snap.V, r.V_min, r.V_max);
  return r;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest: " + path);
  os << "texflow_run_manifest: 1\n";
  os << "solver_version: " << kVersion << "\n";
  os << "run_id: " << m.run_id << "\n";
  os << "config_file: " << m.config_file << "\n";
  os << "grid_height: " << m.grid_height << "\n";
  os << "grid_width: " << m.grid_width << "\n";
  os << "wall_ms_per_step: " << m.wall_ms_per_step << "\n";
  os << "low_mach_warning: " << (m.low_mach_warning ? 1 : 0) << "\n";
  os << "snapshot_count: " << m.snapshots.size() << "\n";
  os << "snapshot_columns: t path rho_min rho_max p_min p_max U_min U_max "
        "V_min V_max\n";
  for (const auto& r : m.snapshots) {
    os << "snapshot: " << r.t << ' ' << r.path << ' '
       << detail::fmt_f32(r.rho_min) << ' ' << detail::fmt_f32(r.rho_max)
       << ' ' << detail::fmt_f32(r.p_min) << ' ' << detail::fmt_f32(r.p_max)
       << ' ' << detail::fmt_f32(r.U_min) << ' ' << detail::fmt_f32(r.U_max)
       << ' ' << detail::fmt_f32(r.V_min) << ' ' << detail::fmt_f32(r.V_max)
       << '\n';
  }
  if (!os) throw IoError("manifest write failed: " + path);
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read manifest: " + path);
  RunManifest m;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw IoError("manifest: malformed line: " + line);
    }
    const std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.erase(0, 1);
    if (key == "texflow_run_manifest") {
      header_seen = true;
    } else if (key == "solver_version") {
      // informational
    } else if (key == "run_id") {
      m.run_id = value;
    } else if (key == "config_file") {
      m.config_file = value;
    } else if (key == "grid_height") {
      m.grid_height = std::stoi(value);
    } else if (key == "grid_width") {
      m.grid_width = std::stoi(value);
    } else if (key == "wall_ms_per_step") {
      m.wall_ms_per_step = std::stod(value);
    } else if (key == "low_mach_warning") {
      m.low_mach_warning = value == "1";
    } else if (key == "snapshot_count" || key == "snapshot_columns") {
      // redundant with the table; ignored on read
    } else if (key == "snapshot") {
      std::istringstream ss(value);
      SnapshotRecord r;
      ss >> r.t >> r.path >> r.rho_min >> r.rho_max >> r.p_min >> r.p_max >>
          r.U_min >> r.U_max >> r.V_min >> r.V_max;
      if (!ss) throw IoError("manifest: malformed snapshot row: " + line);
      m.snapshots.push_back(std::move(r));
    } else {
      throw IoError("manifest: unknown key: " + key);
    }
  }
  if (!header_seen) throw IoError("manifest: missing header: " + path);
  return m;
}

// Checks that every listed snapshot is readable and its field ranges match
// the recorded min/max exactly.
inline void validate_manifest(const RunManifest& m, const std::string& dir) {
  namespace fs = std::filesystem;
  for (const auto& r : m.snapshots) {
    const std::string p = (fs::path(dir) / r.path).string();
    FlowSnapshot snap = read_snapshot(p);
    SnapshotRecord fresh = make_record(snap, r.path);
    if (snap.t != r.t || fresh.rho_min != r.rho_min ||
        fresh.rho_max != r.rho_max || fresh.p_min != r.p_min ||
        fresh.p_max != r.p_max || fresh.U_min != r.U_min ||
        fresh.U_max != r.U_max || fresh.V_min != r.V_min ||
        fresh.V_max != r.V_max) {
      throw IoError("manifest: snapshot does not match recorded ranges: " +
                    p);
    }
  }
}

}  // namespace texflow::sim
