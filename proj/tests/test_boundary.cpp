#include <catch2/catch_amalgamated.hpp>

#include "texflow/lbm/boundary.hpp"
#include "texflow/lbm/kernel.hpp"
#include "texflow/rng.hpp"

using namespace texflow;
using namespace texflow::lbm;

namespace {

void fill_equilibrium(DistributionField& f, double rho, double ux, double uy) {
  const auto feq = equilibrium(rho, ux, uy);
  for (int p = 0; p < 9; ++p) {
    std::fill(f.plane(p), f.plane(p) + f.plane_size(), feq[p]);
  }
}

// Closed box: solid frame all around (one texture spanning the full length
// would only close top/bottom, so flip columns solid by hand).
SolidMask closed_box(int h, int w) {
  Grid2D<uint8_t> solid(h, w, 0);
  for (int x = 0; x < w; ++x) {
    solid.at(0, x) = 1;
    solid.at(h - 1, x) = 1;
  }
  for (int y = 0; y < h; ++y) {
    solid.at(y, 0) = 1;
    solid.at(y, w - 1) = 1;
  }
  return SolidMask(std::move(solid));
}

double fluid_mass(const DistributionField& f, const SolidMask& mask) {
  double total = 0;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      if (mask.is_solid(y, x)) continue;
      for (int p = 0; p < 9; ++p) total += f.at(p, y, x);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("bounce_back") {
  SECTION("uniform rest equilibrium next to a wall is unchanged") {
    ChannelSpec spec{12, 8, 2, 3, 3, 1};
    const SolidMask mask = build_mask(spec);
    DistributionField f(8, 12), scratch(8, 12);
    fill_equilibrium(f, 1.0, 0.0, 0.0);
    DistributionField before = f;
    bounce_back(f, mask);
    stream(f, scratch);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 12; ++x) {
        if (mask.is_solid(y, x)) continue;
        for (int p = 0; p < 9; ++p) {
          CHECK_THAT(f.at(p, y, x),
                     Catch::Matchers::WithinAbs(before.at(p, y, x), 1e-15));
        }
      }
    }
  }

  SECTION("single population aimed at a solid node reverses in place") {
    const SolidMask mask = closed_box(6, 6);
    DistributionField f(6, 6), scratch(6, 6);
    f.at(2, 4, 3) = 0.7;  // e2 = (0, +1) at y=4 aims into the wall row y=5
    bounce_back(f, mask);
    stream(f, scratch);
    CHECK(f.at(2, 4, 3) == 0.0);
    CHECK(f.at(D2Q9::kOpposite[2], 4, 3) == 0.7);
  }

  SECTION("closed box conserves fluid mass over full steps with random f") {
    const SolidMask mask = closed_box(7, 9);
    DistributionField f(7, 9), scratch(7, 9);
    Pcg32 rng(99);
    for (int y = 1; y < 6; ++y) {
      for (int x = 1; x < 8; ++x) {
        for (int p = 0; p < 9; ++p) f.at(p, y, x) = rng.uniform(0.1, 1.0);
      }
    }
    const double before = fluid_mass(f, mask);
    for (int s = 0; s < 10; ++s) {
      bounce_back(f, mask);
      stream(f, scratch);
    }
    CHECK_THAT(fluid_mass(f, mask),
               Catch::Matchers::WithinAbs(before, 1e-12));
  }
}

TEST_CASE("inlet velocity closure (Zou-He)") {
  ChannelSpec spec{16, 10, 0, 1, 0, 0};
  const SolidMask mask = build_mask(spec);
  const double u_in = 0.04;

  SECTION("uniform equilibrium at (1, u_in) is a fixed point") {
    DistributionField f(10, 16);
    fill_equilibrium(f, 1.0, u_in, 0.0);
    DistributionField before = f;
    inlet_velocity_bc(f, u_in, mask);
    for (int y = 1; y < 9; ++y) {
      for (int p : {1, 5, 8}) {
        CHECK_THAT(f.at(p, y, 0),
                   Catch::Matchers::WithinAbs(before.at(p, y, 0), 1e-14));
      }
    }
  }

  SECTION("measured inlet velocity equals u_in to 1e-12") {
    DistributionField f(10, 16);
    fill_equilibrium(f, 1.05, 0.01, 0.005);  // arbitrary interior state
    inlet_velocity_bc(f, u_in, mask);
    MacroscopicFields m(10, 16);
    compute_moments(f, m, &mask);
    for (int y = 2; y < 8; ++y) {  // rows away from the wall corners
      CHECK_THAT(m.u.at(y, 0), Catch::Matchers::WithinAbs(u_in, 1e-12));
      CHECK_THAT(m.v.at(y, 0), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
  }

  SECTION("u_in = 0 against a quiescent field changes nothing") {
    DistributionField f(10, 16);
    fill_equilibrium(f, 1.0, 0.0, 0.0);
    DistributionField before = f;
    inlet_velocity_bc(f, 0.0, mask);
    CHECK(f == before);
  }
}

TEST_CASE("outlet pressure closure (Zou-He)") {
  ChannelSpec spec{16, 10, 0, 1, 0, 0};
  const SolidMask mask = build_mask(spec);
  const int W = 16;

  SECTION("uniform equilibrium at rho_out is a fixed point") {
    DistributionField f(10, W);
    fill_equilibrium(f, 1.0, 0.03, 0.0);
    DistributionField before = f;
    outlet_pressure_bc(f, 1.0, mask);
    for (int y = 1; y < 9; ++y) {
      for (int p : {3, 6, 7}) {
        CHECK_THAT(f.at(p, y, W - 1),
                   Catch::Matchers::WithinAbs(before.at(p, y, W - 1), 1e-14));
      }
    }
  }

  SECTION("measured outlet density equals rho_out to 1e-12") {
    DistributionField f(10, W);
    fill_equilibrium(f, 1.08, 0.02, -0.004);
    outlet_pressure_bc(f, 1.0, mask);
    MacroscopicFields m(10, W);
    compute_moments(f, m, &mask);
    for (int y = 2; y < 8; ++y) {
      CHECK_THAT(m.rho.at(y, W - 1), Catch::Matchers::WithinAbs(1.0, 1e-12));
      CHECK_THAT(m.v.at(y, W - 1), Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
  }

  SECTION("rho_out = 1 on a quiescent unit-density field changes nothing") {
    DistributionField f(10, W);
    fill_equilibrium(f, 1.0, 0.0, 0.0);
    DistributionField before = f;
    outlet_pressure_bc(f, 1.0, mask);
    for (int p = 0; p < 9; ++p) {
      for (int y = 0; y < 10; ++y) {
        CHECK_THAT(f.at(p, y, W - 1),
                   Catch::Matchers::WithinAbs(before.at(p, y, W - 1), 1e-16));
      }
    }
  }
}
