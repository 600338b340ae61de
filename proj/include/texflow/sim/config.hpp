#pragma once

#include <array>
#include <cstdint>

#include "texflow/common.hpp"
#include "texflow/lbm/boundary.hpp"
#include "texflow/lbm/geometry.hpp"

namespace texflow::sim {

struct SimulationConfig {
  lbm::ChannelSpec channel;
  lbm::BoundaryConfig boundary;
  double tau = 0.8;
  std::array<double, 2> force = {0.0, 0.0};
  long long n_steps = 2000;
  long long snapshot_stride = 10;
  uint64_t seed = 0;
  // Periodic in x: no inlet/outlet closures (body-force driven validation
  // runs). Walls stay bounce-back.
  bool periodic_x = false;

  // Kinematic viscosity realized by the BGK kernel.
  double nu() const { return lbm::D2Q9::kCs2 * (tau - 0.5); }

  void validate() const {
    channel.validate();
    if (!periodic_x) boundary.validate();
    if (!(tau > 0.5)) throw ConfigError("simulation: tau must exceed 0.5");
    if (n_steps < 1) throw ConfigError("simulation: n_steps must be >= 1");
    if (snapshot_stride < 1) {
      throw ConfigError("simulation: snapshot_stride must be >= 1");
    }
  }
};

}  // namespace texflow::sim
