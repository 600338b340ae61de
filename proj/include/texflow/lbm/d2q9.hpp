#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace texflow::lbm {

// D2Q9 velocity set. Direction order: rest, the four axis directions
// (+x, +y, -x, -y), then the diagonals (+x+y, -x+y, -x-y, +x-y).
// opposite(p) pairs each direction with its reverse; bounce-back relies
// on this table.
struct D2Q9 {
  static constexpr int kQ = 9;

  static constexpr std::array<int, kQ> kEx = {0, 1, 0, -1, 0, 1, -1, -1, 1};
  static constexpr std::array<int, kQ> kEy = {0, 0, 1, 0, -1, 1, 1, -1, -1};

  static constexpr std::array<double, kQ> kWeight = {
      4.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,  1.0 / 9.0,
      1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0};

  static constexpr std::array<int, kQ> kOpposite = {0, 3, 4, 1, 2, 7, 8, 5, 6};

  // Pure lattice units: dx = dt = 1, c = dx/dt = 1, c_s = c/sqrt(3).
  static constexpr double kDx = 1.0;
  static constexpr double kDt = 1.0;
  static constexpr double kC = 1.0;
  static constexpr double kCs2 = 1.0 / 3.0;
  static constexpr double kInvCs2 = 3.0;

  static double cs() { return std::sqrt(kCs2); }
};

// f_p^eq = rho w_p [1 + e_p.u/c_s^2 + (e_p.u)^2/(2 c_s^4) - u^2/(2 c_s^2)]
// Second-order Hermite equilibrium; moments: sum f^eq = rho,
// sum f^eq e = rho u.
inline void equilibrium_unchecked(double rho, double ux, double uy,
                                  double* feq) {
  const double usq = 1.5 * (ux * ux + uy * uy);  // u^2 / (2 c_s^2)
  for (int p = 0; p < D2Q9::kQ; ++p) {
    const double eu = 3.0 * (D2Q9::kEx[p] * ux + D2Q9::kEy[p] * uy);
    feq[p] = rho * D2Q9::kWeight[p] * (1.0 + eu + 0.5 * eu * eu - usq);
  }
}

inline std::array<double, 9> equilibrium(double rho, double ux, double uy) {
  if (!(rho > 0.0)) {
    throw std::domain_error("equilibrium: non-positive density rho=" +
                            std::to_string(rho));
  }
  std::array<double, 9> feq;
  equilibrium_unchecked(rho, ux, uy, feq.data());
  return feq;
}

}  // namespace texflow::lbm
