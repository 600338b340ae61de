#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"
#include "texflow/lbm/d2q9.hpp"
#include "texflow/lbm/distribution.hpp"
#include "texflow/lbm/geometry.hpp"

namespace texflow::lbm {

// Zeroth/first moments plus the force-corrected velocity (U, V) and
// pressure p = c_s^2 rho. u, v are the raw moment velocities; U, V carry
// the half-force shift when a body force is active.
struct MacroscopicFields {
  Grid2D<double> rho, u, v, U, V, p;

  MacroscopicFields() = default;
  MacroscopicFields(int height, int width)
      : rho(height, width, 1.0),
        u(height, width, 0.0),
        v(height, width, 0.0),
        U(height, width, 0.0),
        V(height, width, 0.0),
        p(height, width, D2Q9::kCs2) {}

  int height() const { return rho.height(); }
  int width() const { return rho.width(); }
};

// rho = sum_p f_p, (u, v) = (1/rho) sum_p f_p e_p, p = c_s^2 rho.
// U and V are set equal to u, v; apply_force_shift corrects them when a
// body force acts. Solid nodes (when a mask is given) keep rho = 1, u = 0.
// Throws DivergenceError at the first fluid node with rho <= 0 or a
// non-finite population sum.
inline void compute_moments(const DistributionField& f, MacroscopicFields& out,
                            const SolidMask* mask = nullptr) {
  const int H = f.height();
  const int W = f.width();
  const size_t n = f.plane_size();
  const double* pl[9];
  for (int p = 0; p < 9; ++p) pl[p] = f.plane(p);

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const size_t i = static_cast<size_t>(y) * W + x;
      if (mask && mask->solid().data()[i]) {
        out.rho.data()[i] = 1.0;
        out.u.data()[i] = 0.0;
        out.v.data()[i] = 0.0;
        out.U.data()[i] = 0.0;
        out.V.data()[i] = 0.0;
        out.p.data()[i] = D2Q9::kCs2;
        continue;
      }
      double rho = 0.0, mx = 0.0, my = 0.0;
      for (int p = 0; p < 9; ++p) {
        const double fp = pl[p][i];
        rho += fp;
        mx += fp * D2Q9::kEx[p];
        my += fp * D2Q9::kEy[p];
      }
      if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw DivergenceError("compute_moments: rho=" + std::to_string(rho) +
                                  " at node (y=" + std::to_string(y) +
                                  ", x=" + std::to_string(x) + ")",
                              -1, y, x);
      }
      out.rho.data()[i] = rho;
      out.u.data()[i] = mx / rho;
      out.v.data()[i] = my / rho;
      out.U.data()[i] = mx / rho;
      out.V.data()[i] = my / rho;
      out.p.data()[i] = D2Q9::kCs2 * rho;
    }
  }
  (void)n;
}

// BGK relaxation toward equilibrium: f <- f - (1/tau)(f - f^eq).
// Conserves per-node mass and momentum because f^eq shares f's moments.
inline void collide(DistributionField& f, const DistributionField& feq,
                    double tau) {
  if (!(tau > 0.5)) {
    throw ConfigError("collide: tau must exceed 0.5, got " +
                      std::to_string(tau));
  }
  const double omega = 1.0 / tau;
  const size_t n = f.size();
  double* fd = f.data();
  const double* ed = feq.data();
  for (size_t i = 0; i < n; ++i) {
    fd[i] -= omega * (fd[i] - ed[i]);
  }
}

// Moves every population one lattice link along its direction with periodic
// wrap on both axes; a pure permutation of storage. Boundary passes
// (bounce-back, inlet/outlet closures) own the wrapped border slots.
inline void stream(DistributionField& f, DistributionField& scratch) {
  const int H = f.height();
  const int W = f.width();
  for (int p = 0; p < D2Q9::kQ; ++p) {
    const int dx = D2Q9::kEx[p];
    const int dy = D2Q9::kEy[p];
    const double* src = f.plane(p);
    double* dst = scratch.plane(p);
    for (int y = 0; y < H; ++y) {
      const int ty = (y + dy + H) % H;
      const double* srow = src + static_cast<size_t>(y) * W;
      double* drow = dst + static_cast<size_t>(ty) * W;
      if (dx == 0) {
        std::copy(srow, srow + W, drow);
      } else if (dx == 1) {
        drow[0] = srow[W - 1];
        std::copy(srow, srow + (W - 1), drow + 1);
      } else {  // dx == -1
        drow[W - 1] = srow[0];
        std::copy(srow + 1, srow + W, drow);
      }
    }
  }
  f.swap(scratch);
}

// Reflects post-collision populations on every fluid->solid link. The value
// is staged in the solid neighbour's opposite slot; the next stream pass
// carries it back to the fluid node, which realizes halfway bounce-back
// (wall plane midway along the link).
inline void bounce_back(DistributionField& f, const SolidMask& mask) {
  const size_t n = f.plane_size();
  double* base = f.data();
  for (const BoundaryLink& link : mask.links()) {
    const int opp = D2Q9::kOpposite[link.dir];
    base[static_cast<size_t>(opp) * n + link.dst] =
        base[static_cast<size_t>(link.dir) * n + link.src];
  }
}

// U = u + F dt / (2 rho) per node (both components); identity when F = 0.
inline void apply_force_shift(MacroscopicFields& macro, double fx, double fy,
                              double dt = D2Q9::kDt,
                              const SolidMask* mask = nullptr) {
  const size_t n = macro.rho.size();
  for (size_t i = 0; i < n; ++i) {
    if (mask && mask->solid().data()[i]) {
      macro.U.data()[i] = 0.0;
      macro.V.data()[i] = 0.0;
      continue;
    }
    const double rho = macro.rho.data()[i];
    if (!(rho > 0.0)) {
      throw std::domain_error(
          "apply_force_shift: non-positive density rho=" +
          std::to_string(rho));
    }
    macro.U.data()[i] = macro.u.data()[i] + fx * dt / (2.0 * rho);
    macro.V.data()[i] = macro.v.data()[i] + fy * dt / (2.0 * rho);
  }
}

}  // namespace texflow::lbm
