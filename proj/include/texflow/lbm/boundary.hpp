#pragma once

#include <cmath>
#include <string>

#include "texflow/common.hpp"
#include "texflow/lbm/d2q9.hpp"
#include "texflow/lbm/distribution.hpp"
#include "texflow/lbm/geometry.hpp"

namespace texflow::lbm {

struct BoundaryConfig {
  double inlet_velocity = 0.02;  // u_in, lattice units
  double outlet_density = 1.0;   // rho_out; p_out = c_s^2 rho_out

  void validate() const {
    if (!(inlet_velocity > 0.0) || !(inlet_velocity < 0.1)) {
      throw ConfigError("boundary: inlet velocity must lie in (0, 0.1)");
    }
    if (!(outlet_density > 0.0)) {
      throw ConfigError("boundary: outlet density must be positive");
    }
  }
};

// Zou-He velocity closure on the inlet column (x = 0): density is solved
// from the known populations, then the three populations entering from
// outside (f1, f5, f8) are reconstructed so the node's moments give
// u = u_in, v = 0. Slots already written by wall reflection at the
// wall-adjacent corner nodes are left alone (wall wins).
inline void inlet_velocity_bc(DistributionField& f, double u_in,
                              const SolidMask& mask) {
  const int H = f.height();
  const int W = f.width();
  const size_t n = f.plane_size();
  double* base = f.data();
  for (int y = 0; y < H; ++y) {
    if (mask.is_solid(y, 0)) continue;
    const size_t i = static_cast<size_t>(y) * W;
    const double f0 = base[0 * n + i];
    const double f2 = base[2 * n + i];
    const double f3 = base[3 * n + i];
    const double f4 = base[4 * n + i];
    const double f6 = base[6 * n + i];
    const double f7 = base[7 * n + i];
    const double rho = (f0 + f2 + f4 + 2.0 * (f3 + f6 + f7)) / (1.0 - u_in);
    if (!(rho > 0.0) || !std::isfinite(rho)) {
      throw DivergenceError(
          "inlet_velocity_bc: closure density rho=" + std::to_string(rho) +
              " at inlet row y=" + std::to_string(y),
          -1, y, 0);
    }
    const uint16_t claimed = mask.claimed_slots(y, 0);
    const double rux = rho * u_in;
    if (!(claimed & (1u << 1))) {
      base[1 * n + i] = f3 + (2.0 / 3.0) * rux;
    }
    if (!(claimed & (1u << 5))) {
      base[5 * n + i] = f7 - 0.5 * (f2 - f4) + rux / 6.0;
    }
    if (!(claimed & (1u << 8))) {
      base[8 * n + i] = f6 + 0.5 * (f2 - f4) + rux / 6.0;
    }
  }
}

// Zou-He pressure closure on the outlet column (x = W-1): the streamwise
// velocity is solved from the known populations at the prescribed density,
// then f3, f6, f7 are reconstructed (v = 0). Corner slots claimed by wall
// reflection are left alone.
inline void outlet_pressure_bc(DistributionField& f, double rho_out,
                               const SolidMask& mask) {
  const int H = f.height();
  const int W = f.width();
  const size_t n = f.plane_size();
  double* base = f.data();
  if (!(rho_out > 0.0)) {
    throw DivergenceError("outlet_pressure_bc: non-positive rho_out");
  }
  for (int y = 0; y < H; ++y) {
    if (mask.is_solid(y, W - 1)) continue;
    const size_t i = static_cast<size_t>(y) * W + (W - 1);
    const double f0 = base[0 * n + i];
    const double f1 = base[1 * n + i];
    const double f2 = base[2 * n + i];
    const double f4 = base[4 * n + i];
    const double f5 = base[5 * n + i];
    const double f8 = base[8 * n + i];
    const double ux = -1.0 + (f0 + f2 + f4 + 2.0 * (f1 + f5 + f8)) / rho_out;
    if (!std::isfinite(ux)) {
      throw DivergenceError("outlet_pressure_bc: non-finite closure velocity",
                            -1, y, W - 1);
    }
    const uint16_t claimed = mask.claimed_slots(y, W - 1);
    const double rux = rho_out * ux;
    if (!(claimed & (1u << 3))) {
      base[3 * n + i] = f1 - (2.0 / 3.0) * rux;
    }
    if (!(claimed & (1u << 6))) {
      base[6 * n + i] = f8 - 0.5 * (f2 - f4) - rux / 6.0;
    }
    if (!(claimed & (1u << 7))) {
      base[7 * n + i] = f5 + 0.5 * (f2 - f4) - rux / 6.0;
    }
  }
}

}  // namespace texflow::lbm
