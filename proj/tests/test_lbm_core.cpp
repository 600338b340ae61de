#include <catch2/catch_amalgamated.hpp>

#include "texflow/lbm/d2q9.hpp"
#include "texflow/lbm/distribution.hpp"
#include "texflow/lbm/kernel.hpp"
#include "texflow/rng.hpp"

using namespace texflow;
using namespace texflow::lbm;

namespace {

DistributionField random_field(int h, int w, uint64_t seed) {
  DistributionField f(h, w);
  Pcg32 rng(seed);
  for (int p = 0; p < D2Q9::kQ; ++p) {
    for (size_t i = 0; i < f.plane_size(); ++i) {
      f.plane(p)[i] = rng.uniform(0.05, 1.0);
    }
  }
  return f;
}

void fill_equilibrium(DistributionField& f, double rho, double ux, double uy) {
  const auto feq = equilibrium(rho, ux, uy);
  for (int p = 0; p < D2Q9::kQ; ++p) {
    std::fill(f.plane(p), f.plane(p) + f.plane_size(), feq[p]);
  }
}

}  // namespace

TEST_CASE("D2Q9 velocity-set identities") {
  double wsum = 0, ex = 0, ey = 0;
  double m[2][2] = {{0, 0}, {0, 0}};
  for (int p = 0; p < 9; ++p) {
    wsum += D2Q9::kWeight[p];
    ex += D2Q9::kWeight[p] * D2Q9::kEx[p];
    ey += D2Q9::kWeight[p] * D2Q9::kEy[p];
    m[0][0] += D2Q9::kWeight[p] * D2Q9::kEx[p] * D2Q9::kEx[p];
    m[0][1] += D2Q9::kWeight[p] * D2Q9::kEx[p] * D2Q9::kEy[p];
    m[1][0] += D2Q9::kWeight[p] * D2Q9::kEy[p] * D2Q9::kEx[p];
    m[1][1] += D2Q9::kWeight[p] * D2Q9::kEy[p] * D2Q9::kEy[p];
  }
  CHECK_THAT(wsum, Catch::Matchers::WithinAbs(1.0, 1e-15));
  CHECK(ex == 0.0);
  CHECK(ey == 0.0);
  CHECK_THAT(m[0][0], Catch::Matchers::WithinAbs(D2Q9::kCs2, 1e-15));
  CHECK_THAT(m[1][1], Catch::Matchers::WithinAbs(D2Q9::kCs2, 1e-15));
  CHECK(m[0][1] == 0.0);
  CHECK(m[1][0] == 0.0);

  for (int p = 0; p < 9; ++p) {
    const int q = D2Q9::kOpposite[p];
    CHECK(D2Q9::kEx[q] == -D2Q9::kEx[p]);
    CHECK(D2Q9::kEy[q] == -D2Q9::kEy[p]);
  }
}

TEST_CASE("equilibrium") {
  SECTION("rest state collapses to rho * w_p") {
    const auto feq = equilibrium(1.0, 0.0, 0.0);
    for (int p = 0; p < 9; ++p) CHECK(feq[p] == D2Q9::kWeight[p]);
  }

  SECTION("hand value for rho=1, u=(0.1, 0)") {
    const auto feq = equilibrium(1.0, 0.1, 0.0);
    const double expected = (1.0 / 9.0) * (1.0 + 0.3 + 0.045 - 0.015);
    CHECK_THAT(feq[1], Catch::Matchers::WithinAbs(expected, 1e-15));
  }

  SECTION("moment identities for random low-Mach states") {
    Pcg32 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const double rho = rng.uniform(0.5, 2.0);
      const double ux = rng.uniform(-0.1, 0.1);
      const double uy = rng.uniform(-0.1, 0.1);
      const auto feq = equilibrium(rho, ux, uy);
      double sum = 0, mx = 0, my = 0;
      for (int p = 0; p < 9; ++p) {
        sum += feq[p];
        mx += feq[p] * D2Q9::kEx[p];
        my += feq[p] * D2Q9::kEy[p];
      }
      CHECK_THAT(sum, Catch::Matchers::WithinAbs(rho, 1e-12));
      CHECK_THAT(mx, Catch::Matchers::WithinAbs(rho * ux, 1e-12));
      CHECK_THAT(my, Catch::Matchers::WithinAbs(rho * uy, 1e-12));
    }
  }

  SECTION("non-positive density is rejected") {
    CHECK_THROWS_AS(equilibrium(0.0, 0, 0), std::domain_error);
    CHECK_THROWS_AS(equilibrium(-1.0, 0, 0), std::domain_error);
  }
}

TEST_CASE("compute_moments") {
  SECTION("equilibrium round trip") {
    DistributionField f(4, 5);
    fill_equilibrium(f, 1.0, 0.1, 0.0);
    MacroscopicFields m(4, 5);
    compute_moments(f, m);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 5; ++x) {
        CHECK_THAT(m.rho.at(y, x), Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(m.u.at(y, x), Catch::Matchers::WithinAbs(0.1, 1e-12));
        CHECK_THAT(m.v.at(y, x), Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(m.p.at(y, x),
                   Catch::Matchers::WithinAbs(D2Q9::kCs2, 1e-12));
      }
    }
  }

  SECTION("all-zero populations diverge") {
    DistributionField f(3, 3);
    MacroscopicFields m(3, 3);
    CHECK_THROWS_AS(compute_moments(f, m), DivergenceError);
  }

  SECTION("matches a direct nine-term summation") {
    DistributionField f = random_field(6, 7, 17);
    MacroscopicFields m(6, 7);
    compute_moments(f, m);
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 7; ++x) {
        double rho = 0, mx = 0, my = 0;
        for (int p = 0; p < 9; ++p) {
          rho += f.at(p, y, x);
          mx += f.at(p, y, x) * D2Q9::kEx[p];
          my += f.at(p, y, x) * D2Q9::kEy[p];
        }
        CHECK_THAT(m.rho.at(y, x), Catch::Matchers::WithinAbs(rho, 1e-13));
        CHECK_THAT(m.u.at(y, x), Catch::Matchers::WithinAbs(mx / rho, 1e-13));
        CHECK_THAT(m.v.at(y, x), Catch::Matchers::WithinAbs(my / rho, 1e-13));
      }
    }
  }
}

TEST_CASE("collide") {
  SECTION("equilibrium is a fixed point") {
    DistributionField f(3, 4), feq(3, 4);
    fill_equilibrium(f, 1.2, 0.05, -0.02);
    feq = f;
    DistributionField before = f;
    collide(f, feq, 0.8);
    CHECK(f == before);
  }

  SECTION("tau = 1 relaxes fully onto equilibrium") {
    DistributionField f = random_field(3, 4, 5);
    DistributionField feq(3, 4);
    fill_equilibrium(feq, 1.0, 0.03, 0.01);
    collide(f, feq, 1.0);
    for (size_t i = 0; i < f.size(); ++i) {
      CHECK_THAT(f.data()[i],
                 Catch::Matchers::WithinAbs(feq.data()[i], 1e-15));
    }
  }

  SECTION("tau at or below 0.5 is rejected") {
    DistributionField f(2, 2), feq(2, 2);
    CHECK_THROWS_AS(collide(f, feq, 0.5), ConfigError);
    CHECK_THROWS_AS(collide(f, feq, 0.2), ConfigError);
  }

  SECTION("conserves per-node mass and momentum") {
    DistributionField f = random_field(5, 6, 23);
    MacroscopicFields m(5, 6);
    compute_moments(f, m);
    DistributionField feq(5, 6);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) {
        double eq[9];
        equilibrium_unchecked(m.rho.at(y, x), m.u.at(y, x), m.v.at(y, x), eq);
        for (int p = 0; p < 9; ++p) feq.at(p, y, x) = eq[p];
      }
    }
    DistributionField before = f;
    collide(f, feq, 0.8);
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) {
        double dm = 0, dmx = 0, dmy = 0;
        for (int p = 0; p < 9; ++p) {
          const double d = f.at(p, y, x) - before.at(p, y, x);
          dm += d;
          dmx += d * D2Q9::kEx[p];
          dmy += d * D2Q9::kEy[p];
        }
        CHECK(std::abs(dm) < 1e-12);
        CHECK(std::abs(dmx) < 1e-12);
        CHECK(std::abs(dmy) < 1e-12);
      }
    }
  }
}

TEST_CASE("stream") {
  SECTION("uniform field is invariant") {
    DistributionField f(4, 4), scratch(4, 4);
    fill_equilibrium(f, 1.0, 0.0, 0.0);
    DistributionField before = f;
    stream(f, scratch);
    CHECK(f == before);
  }

  SECTION("unit population moves one node along its direction") {
    DistributionField f(5, 5), scratch(5, 5);
    f.at(1, 2, 3) = 1.0;  // direction e1 = (+1, 0) at (y=2, x=3)
    stream(f, scratch);
    CHECK(f.at(1, 2, 4) == 1.0);
    double total = 0;
    for (size_t i = 0; i < f.size(); ++i) total += f.data()[i];
    CHECK(total == 1.0);
  }

  SECTION("two streams displace by two nodes on a periodic 3x3 grid") {
    DistributionField f(3, 3), scratch(3, 3);
    f.at(2, 0, 0) = 1.0;  // e2 = (0, +1)
    stream(f, scratch);
    stream(f, scratch);
    CHECK(f.at(2, 2, 0) == 1.0);
    stream(f, scratch);  // wraps back to y = 0
    CHECK(f.at(2, 0, 0) == 1.0);
  }

  SECTION("pure permutation: the multiset of populations is unchanged") {
    DistributionField f = random_field(6, 8, 31);
    std::vector<double> before(f.data(), f.data() + f.size());
    std::sort(before.begin(), before.end());
    DistributionField scratch(6, 8);
    for (int s = 0; s < 10; ++s) stream(f, scratch);
    std::vector<double> after(f.data(), f.data() + f.size());
    std::sort(after.begin(), after.end());
    CHECK(after == before);  // no arithmetic at all, only moves
  }
}

TEST_CASE("apply_force_shift") {
  MacroscopicFields m(2, 2);
  m.rho.fill(1.0);
  m.u.fill(0.0);
  m.v.fill(0.0);

  SECTION("zero force leaves velocity untouched") {
    m.u.fill(0.07);
    apply_force_shift(m, 0.0, 0.0);
    CHECK(m.U.at(0, 0) == 0.07);
    CHECK(m.V.at(0, 0) == 0.0);
  }

  SECTION("hand value: rho=1, F=(0.02, 0) gives U = 0.01") {
    apply_force_shift(m, 0.02, 0.0);
    CHECK_THAT(m.U.at(1, 1), Catch::Matchers::WithinAbs(0.01, 1e-15));
  }

  SECTION("shift scales like 1/rho") {
    apply_force_shift(m, 0.02, 0.0);
    const double du1 = m.U.at(0, 0);
    m.rho.fill(2.0);
    apply_force_shift(m, 0.02, 0.0);
    CHECK_THAT(m.U.at(0, 0), Catch::Matchers::WithinAbs(du1 / 2.0, 1e-15));
  }

  SECTION("non-positive density is rejected") {
    m.rho.at(0, 1) = 0.0;
    CHECK_THROWS_AS(apply_force_shift(m, 0.01, 0.0), std::domain_error);
  }
}
