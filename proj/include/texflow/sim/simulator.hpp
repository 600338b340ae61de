#pragma once

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/lbm/boundary.hpp"
#include "texflow/lbm/d2q9.hpp"
#include "texflow/lbm/distribution.hpp"
#include "texflow/lbm/geometry.hpp"
#include "texflow/lbm/kernel.hpp"
#include "texflow/sim/config.hpp"
#include "texflow/sim/manifest.hpp"
#include "texflow/sim/snapshot.hpp"

namespace texflow::sim {

using lbm::D2Q9;

// Unsteady channel-flow driver. One step() is:
//   moments -> equilibrium -> collide -> bounce_back -> stream ->
//   inlet/outlet closures, with the macroscopic half-force shift applied
//   when fields are read out. A body force enters the collision through the
//   shifted equilibrium velocity u + tau F / rho, which adds F dt of
//   momentum per node per step; the physical velocity is U = u + F dt/(2 rho).
//
// Node updates are independent, so the collision pass is grid-parallel and
// results are bit-identical for any thread count.
class Simulator {
 public:
  explicit Simulator(const SimulationConfig& cfg)
      : cfg_(cfg),
        mask_(lbm::build_mask(cfg.channel)),
        f_(cfg.channel.height, cfg.channel.length),
        scratch_(cfg.channel.height, cfg.channel.length) {
    cfg_.validate();
    // Uniform rest state: rho = 1, u = 0 everywhere.
    double feq0[9];
    lbm::equilibrium_unchecked(1.0, 0.0, 0.0, feq0);
    const size_t n = f_.plane_size();
    for (int p = 0; p < D2Q9::kQ; ++p) {
      std::fill(f_.plane(p), f_.plane(p) + n, feq0[p]);
    }
    initial_fluid_mass_ = fluid_mass();
  }

  const SimulationConfig& config() const { return cfg_; }
  const lbm::SolidMask& mask() const { return mask_; }
  const lbm::DistributionField& distribution() const { return f_; }
  lbm::DistributionField& distribution() { return f_; }
  long long timestep() const { return t_; }
  double max_speed_seen() const { return max_speed_seen_; }

  void step() {
    collide_pass();
    lbm::bounce_back(f_, mask_);
    lbm::stream(f_, scratch_);
    if (!cfg_.periodic_x) {
      lbm::inlet_velocity_bc(f_, cfg_.boundary.inlet_velocity, mask_);
      lbm::outlet_pressure_bc(f_, cfg_.boundary.outlet_density, mask_);
    }
    ++t_;
  }

  lbm::MacroscopicFields macroscopic() const {
    lbm::MacroscopicFields m(f_.height(), f_.width());
    lbm::compute_moments(f_, m, &mask_);
    lbm::apply_force_shift(m, cfg_.force[0], cfg_.force[1], D2Q9::kDt, &mask_);
    return m;
  }

  FlowSnapshot capture() const {
    const lbm::MacroscopicFields m = macroscopic();
    const int H = f_.height(), W = f_.width();
    FlowSnapshot snap;
    snap.t = t_;
    snap.rho = Grid2D<float>(H, W);
    snap.p = Grid2D<float>(H, W);
    snap.U = Grid2D<float>(H, W);
    snap.V = Grid2D<float>(H, W);
    snap.mask = mask_.solid();
    for (size_t i = 0; i < m.rho.size(); ++i) {
      snap.rho.data()[i] = static_cast<float>(m.rho.data()[i]);
      snap.p.data()[i] = static_cast<float>(m.p.data()[i]);
      snap.U.data()[i] = static_cast<float>(m.U.data()[i]);
      snap.V.data()[i] = static_cast<float>(m.V.data()[i]);
    }
    return snap;
  }

  double fluid_mass() const {
    double total = 0.0;
    const int H = f_.height(), W = f_.width();
    for (int y = 0; y < H; ++y) {
      double row = 0.0;
      for (int x = 0; x < W; ++x) {
        if (mask_.is_solid(y, x)) continue;
        const size_t i = static_cast<size_t>(y) * W + x;
        for (int p = 0; p < D2Q9::kQ; ++p) row += f_.plane(p)[i];
      }
      total += row;
    }
    return total;
  }

  double initial_fluid_mass() const { return initial_fluid_mass_; }

 private:
  // Fused moments + equilibrium + BGK relaxation, with the divergence
  // detector inline: non-finite values, rho <= 0, or |U| > 0.5 abort.
  void collide_pass() {
    const int H = f_.height(), W = f_.width();
    const double omega = 1.0 / cfg_.tau;
    const double fx = cfg_.force[0], fy = cfg_.force[1];
    const bool forced = fx != 0.0 || fy != 0.0;
    const uint8_t* solid = mask_.solid().data();
    double* pl[9];
    for (int p = 0; p < 9; ++p) pl[p] = f_.plane(p);

    // Per-row failure slots keep the abort decision deterministic under
    // threading: the lowest (y, x) failure wins.
    std::vector<int> fail_x(H, -1);
    double local_max_speed = 0.0;

#pragma omp parallel for schedule(static) reduction(max : local_max_speed)
    for (int y = 0; y < H; ++y) {
      const size_t row0 = static_cast<size_t>(y) * W;
      for (int x = 0; x < W; ++x) {
        const size_t i = row0 + x;
        if (solid[i]) continue;
        double fv[9];
        double rho = 0.0, mx = 0.0, my = 0.0;
        for (int p = 0; p < 9; ++p) {
          fv[p] = pl[p][i];
          rho += fv[p];
        }
        mx = fv[1] - fv[3] + fv[5] - fv[6] - fv[7] + fv[8];
        my = fv[2] - fv[4] + fv[5] + fv[6] - fv[7] - fv[8];
        if (!(rho > 0.0) || !std::isfinite(rho) || !std::isfinite(mx) ||
            !std::isfinite(my)) {
          if (fail_x[y] < 0) fail_x[y] = x;
          continue;
        }
        const double ux = mx / rho;
        const double uy = my / rho;
        const double Ux = ux + (forced ? fx / (2.0 * rho) : 0.0);
        const double Uy = uy + (forced ? fy / (2.0 * rho) : 0.0);
        const double speed = std::sqrt(Ux * Ux + Uy * Uy);
        local_max_speed = std::max(local_max_speed, speed);
        if (speed > 0.5) {
          if (fail_x[y] < 0) fail_x[y] = x;
          continue;
        }
        const double ex = ux + (forced ? cfg_.tau * fx / rho : 0.0);
        const double ey = uy + (forced ? cfg_.tau * fy / rho : 0.0);
        double feq[9];
        lbm::equilibrium_unchecked(rho, ex, ey, feq);
        for (int p = 0; p < 9; ++p) {
          pl[p][i] = fv[p] - omega * (fv[p] - feq[p]);
        }
      }
    }
    max_speed_seen_ = std::max(max_speed_seen_, local_max_speed);
    for (int y = 0; y < H; ++y) {
      if (fail_x[y] >= 0) {
        throw DivergenceError(
            "divergence at t=" + std::to_string(t_) + " node (y=" +
                std::to_string(y) + ", x=" + std::to_string(fail_x[y]) +
                "): non-finite state, rho <= 0, or |U| > 0.5",
            t_, y, fail_x[y]);
      }
    }
  }

  SimulationConfig cfg_;
  lbm::SolidMask mask_;
  lbm::DistributionField f_;
  lbm::DistributionField scratch_;
  long long t_ = 0;
  double initial_fluid_mass_ = 0.0;
  double max_speed_seen_ = 0.0;
};

// Capture times: every snapshot_stride steps plus the fixed unsteady set
// {5, 50, 100, 500, 1000} when within range.
inline bool is_capture_step(long long t, const SimulationConfig& cfg) {
  if (t % cfg.snapshot_stride == 0) return true;
  return t == 5 || t == 50 || t == 100 || t == 500 || t == 1000;
}

inline void finish_manifest(RunManifest& manifest, const Simulator& si,
                            std::chrono::steady_clock::time_point start) {
  const auto end = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration<double, std::milli>(end - start).count();
  manifest.wall_ms_per_step =
      si.timestep() > 0 ? ms / static_cast<double>(si.timestep()) : 0.0;
  manifest.low_mach_warning = si.max_speed_seen() > 0.3 * D2Q9::cs();
}

// Advances n_steps from rest, handing each captured snapshot to `sink`.
// Total fluid mass is required to stay within +-5% of its initial value.
// On divergence the run aborts; `partial_out`, when given, receives a
// manifest describing every snapshot captured before the abort.
inline RunManifest run(const SimulationConfig& cfg,
                       const std::function<void(const FlowSnapshot&,
                                                SnapshotRecord&)>& sink,
                       RunManifest* partial_out = nullptr) {
  cfg.validate();
  Simulator si(cfg);
  RunManifest manifest;
  manifest.grid_height = cfg.channel.height;
  manifest.grid_width = cfg.channel.length;
  const auto start = std::chrono::steady_clock::now();
  try {
    for (long long t = 1; t <= cfg.n_steps; ++t) {
      si.step();
      if (!is_capture_step(t, cfg)) continue;
      const FlowSnapshot snap = si.capture();
      const double mass = si.fluid_mass();
      if (std::abs(mass - si.initial_fluid_mass()) >
          0.05 * si.initial_fluid_mass()) {
        throw DivergenceError(
            "total fluid mass drifted beyond 5% of initial at t=" +
                std::to_string(t),
            t);
      }
      SnapshotRecord rec = make_record(snap, "");
      sink(snap, rec);
      manifest.snapshots.push_back(std::move(rec));
    }
  } catch (const DivergenceError&) {
    finish_manifest(manifest, si, start);
    if (partial_out) *partial_out = std::move(manifest);
    throw;
  }
  finish_manifest(manifest, si, start);
  return manifest;
}

// In-memory run; snapshots returned in capture order.
inline std::vector<FlowSnapshot> run_collect(const SimulationConfig& cfg,
                                             RunManifest* manifest_out =
                                                 nullptr) {
  std::vector<FlowSnapshot> out;
  RunManifest m = run(cfg, [&](const FlowSnapshot& s, SnapshotRecord& rec) {
    rec.path = "memory:" + std::to_string(s.t);
    out.push_back(s);
  });
  if (manifest_out) *manifest_out = std::move(m);
  return out;
}

// Disk run: snap_<t>.txfs files plus `manifest` in `dir`. On divergence the
// manifest still records the last valid snapshots before rethrowing.
inline RunManifest run_to_dir(const SimulationConfig& cfg,
                              const std::string& dir,
                              const std::string& run_id) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto sink = [&](const FlowSnapshot& s, SnapshotRecord& rec) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%08lld.txfs",
                  static_cast<long long>(s.t));
    rec.path = name;
    write_snapshot(s, (fs::path(dir) / name).string());
  };
  RunManifest manifest;
  try {
    manifest = run(cfg, sink, &manifest);
  } catch (const DivergenceError&) {
    manifest.run_id = run_id;
    write_manifest(manifest, (fs::path(dir) / "manifest").string());
    throw;
  }
  manifest.run_id = run_id;
  write_manifest(manifest, (fs::path(dir) / "manifest").string());
  return manifest;
}

// U column at the node column nearest x_over_L * L, bottom-to-top.
inline std::vector<float> extract_profile(const FlowSnapshot& snap,
                                          double x_over_L) {
  if (!(x_over_L >= 0.0 && x_over_L <= 1.0)) {
    throw ConfigError("extract_profile: x/L must lie in [0, 1]");
  }
  const int W = snap.width();
  int col = static_cast<int>(std::lround(x_over_L * W));
  col = std::clamp(col, 0, W - 1);
  std::vector<float> profile(static_cast<size_t>(snap.height()));
  for (int y = 0; y < snap.height(); ++y) profile[y] = snap.U.at(y, col);
  return profile;
}

// Analytic plane Poiseuille profile used as a validation oracle:
// u(y) = g/(2 nu) * y * (H_fluid - y), y measured from the lower wall plane.
// With halfway bounce-back the wall planes sit half a link beyond the
// extreme fluid rows, so fluid row j lies at y = j - 0.5 when rows 1..H-2
// are fluid and H_fluid = H - 2.
struct PoiseuilleReference {
  double h_fluid;  // channel width between wall planes
  double g;        // body acceleration (F / rho)
  double nu;

  double operator()(double y) const {
    return g / (2.0 * nu) * y * (h_fluid - y);
  }
  double max() const { return g * h_fluid * h_fluid / (8.0 * nu); }

  static PoiseuilleReference from_body_force(double h_fluid, double force,
                                             double rho, double nu) {
    if (!(h_fluid > 0.0) || !(nu > 0.0) || !(rho > 0.0)) {
      throw ConfigError("poiseuille reference: positive inputs required");
    }
    return {h_fluid, force / rho, nu};
  }
  static PoiseuilleReference from_pressure_drop(double h_fluid, double dp,
                                                double length, double rho,
                                                double nu) {
    if (!(h_fluid > 0.0) || !(nu > 0.0) || !(rho > 0.0) || !(length > 0.0)) {
      throw ConfigError("poiseuille reference: positive inputs required");
    }
    return {h_fluid, dp / (rho * length), nu};
  }
};

// Runs a body-force-driven periodic channel until the centerline velocity
// settles (relative change below tol across check_every steps) or max_steps.
inline FlowSnapshot run_to_steady(const SimulationConfig& cfg,
                                  double tol = 1e-9,
                                  long long check_every = 200,
                                  long long max_steps = 200000) {
  Simulator si(cfg);
  double prev = -1.0;
  for (long long t = 1; t <= max_steps; ++t) {
    si.step();
    if (t % check_every != 0) continue;
    const lbm::MacroscopicFields m = si.macroscopic();
    double maxU = 0.0;
    for (size_t i = 0; i < m.U.size(); ++i) {
      maxU = std::max(maxU, std::abs(m.U.data()[i]));
    }
    if (prev >= 0.0 && maxU > 0.0 &&
        std::abs(maxU - prev) / maxU < tol) {
      break;
    }
    prev = maxU;
  }
  return si.capture();
}

}  // namespace texflow::sim
