#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"

namespace texflow::eval {

namespace detail {
inline void check_lengths(size_t a, size_t b) {
  if (a != b) {
    throw std::invalid_argument("metrics: length mismatch (" +
                                std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
}
}  // namespace detail

inline double mae(const std::vector<double>& y,
                  const std::vector<double>& yhat) {
  detail::check_lengths(y.size(), yhat.size());
  if (y.empty()) throw std::invalid_argument("mae: empty input");
  double s = 0;
  for (size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

inline double mse(const std::vector<double>& y,
                  const std::vector<double>& yhat) {
  detail::check_lengths(y.size(), yhat.size());
  if (y.empty()) throw std::invalid_argument("mse: empty input");
  double s = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

inline double rmse(const std::vector<double>& y,
                   const std::vector<double>& yhat) {
  return std::sqrt(mse(y, yhat));
}

// R^2 = 1 - RSS / TSS with TSS about the mean of y. Requires n >= 2 and a
// non-constant reference.
inline double r2(const std::vector<double>& y,
                 const std::vector<double>& yhat) {
  detail::check_lengths(y.size(), yhat.size());
  if (y.size() < 2) throw std::invalid_argument("r2: need n >= 2");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double rss = 0, tss = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    rss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    tss += (y[i] - mean) * (y[i] - mean);
  }
  if (tss == 0.0) {
    throw std::domain_error("r2: reference values are constant");
  }
  return 1.0 - rss / tss;
}

// Range-normalized mean absolute error, as a percentage, averaged across
// channels: 100 * mean|y - yhat| / (max y - min y).
inline double relative_error_percent(
    const std::vector<std::vector<double>>& y,
    const std::vector<std::vector<double>>& yhat) {
  detail::check_lengths(y.size(), yhat.size());
  if (y.empty()) throw std::invalid_argument("relative error: no channels");
  double acc = 0;
  for (size_t c = 0; c < y.size(); ++c) {
    const double m = mae(y[c], yhat[c]);
    const auto [mn, mx] = std::minmax_element(y[c].begin(), y[c].end());
    const double range = *mx - *mn;
    if (range == 0.0) {
      throw std::domain_error("relative error: constant reference channel");
    }
    acc += 100.0 * m / range;
  }
  return acc / static_cast<double>(y.size());
}

// Elementwise |a - b| with solid nodes forced to zero.
template <typename T>
Grid2D<T> error_map(const Grid2D<T>& truth, const Grid2D<T>& pred,
                    const Grid2D<uint8_t>* mask = nullptr) {
  if (truth.height() != pred.height() || truth.width() != pred.width()) {
    throw std::invalid_argument("error_map: shape mismatch");
  }
  Grid2D<T> out(truth.height(), truth.width());
  for (size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = (mask && mask->data()[i])
                        ? T{}
                        : std::abs(truth.data()[i] - pred.data()[i]);
  }
  return out;
}

// omega = dV/dx - dU/dy with dx = 1. Central differences on interior fluid
// nodes; one-sided next to solids and domain borders; solid nodes carry 0.
template <typename T>
Grid2D<T> vorticity(const Grid2D<T>& U, const Grid2D<T>& V,
                    const Grid2D<uint8_t>* mask = nullptr) {
  const int H = U.height(), W = U.width();
  if (H < 3 || W < 3) {
    throw std::invalid_argument("vorticity: need at least 3 nodes per axis");
  }
  if (V.height() != H || V.width() != W) {
    throw std::invalid_argument("vorticity: U/V shape mismatch");
  }
  auto fluid = [&](int y, int x) {
    return !mask || mask->at(y, x) == 0;
  };
  Grid2D<T> w(H, W, T{});
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!fluid(y, x)) continue;
      const bool xm = x > 0 && fluid(y, x - 1);
      const bool xp = x < W - 1 && fluid(y, x + 1);
      const bool ym = y > 0 && fluid(y - 1, x);
      const bool yp = y < H - 1 && fluid(y + 1, x);
      T dvdx{};
      if (xm && xp) {
        dvdx = (V.at(y, x + 1) - V.at(y, x - 1)) / T(2);
      } else if (xp) {
        dvdx = V.at(y, x + 1) - V.at(y, x);
      } else if (xm) {
        dvdx = V.at(y, x) - V.at(y, x - 1);
      }
      T dudy{};
      if (ym && yp) {
        dudy = (U.at(y + 1, x) - U.at(y - 1, x)) / T(2);
      } else if (yp) {
        dudy = U.at(y + 1, x) - U.at(y, x);
      } else if (ym) {
        dudy = U.at(y, x) - U.at(y - 1, x);
      }
      w.at(y, x) = dvdx - dudy;
    }
  }
  return w;
}

// The four scores of one evaluation, per velocity component and pooled.
struct MetricsReport {
  std::string label;
  double mae_u = 0, mae_v = 0, mae_all = 0;
  double mse_u = 0, mse_v = 0, mse_all = 0;
  double rmse_u = 0, rmse_v = 0, rmse_all = 0;
  double r2_u = 0, r2_v = 0, r2_all = 0;
  double relative_error_pct = 0;
  size_t n = 0;             // values per channel
  bool denormalized = true;  // metrics in lattice units, not [0,1]

  static MetricsReport compute(const std::vector<double>& yu,
                               const std::vector<double>& yu_hat,
                               const std::vector<double>& yv,
                               const std::vector<double>& yv_hat,
                               bool denorm, std::string label = "") {
    MetricsReport r;
    r.label = std::move(label);
    r.denormalized = denorm;
    r.n = yu.size();
    r.mae_u = mae(yu, yu_hat);
    r.mae_v = mae(yv, yv_hat);
    r.mse_u = mse(yu, yu_hat);
    r.mse_v = mse(yv, yv_hat);
    r.rmse_u = std::sqrt(r.mse_u);
    r.rmse_v = std::sqrt(r.mse_v);
    r.r2_u = r2(yu, yu_hat);
    r.r2_v = r2(yv, yv_hat);
    std::vector<double> all_y(yu), all_hat(yu_hat);
    all_y.insert(all_y.end(), yv.begin(), yv.end());
    all_hat.insert(all_hat.end(), yv_hat.begin(), yv_hat.end());
    r.mae_all = mae(all_y, all_hat);
    r.mse_all = mse(all_y, all_hat);
    r.rmse_all = std::sqrt(r.mse_all);
    r.r2_all = r2(all_y, all_hat);
    r.relative_error_pct = relative_error_percent({yu, yv}, {yu_hat, yv_hat});
    return r;
  }

  static std::string csv_header() {
    return "label, n, denormalized, mae_u, mae_v, mae, mse_u, mse_v, mse, "
           "rmse_u, rmse_v, rmse, r2_u, r2_v, r2, relative_error_pct";
  }

  std::string csv_row() const {
    auto f = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.10g", v);
      return std::string(buf);
    };
    return label + ", " + std::to_string(n) + ", " +
           (denormalized ? "1" : "0") + ", " + f(mae_u) + ", " + f(mae_v) +
           ", " + f(mae_all) + ", " + f(mse_u) + ", " + f(mse_v) + ", " +
           f(mse_all) + ", " + f(rmse_u) + ", " + f(rmse_v) + ", " +
           f(rmse_all) + ", " + f(r2_u) + ", " + f(r2_v) + ", " + f(r2_all) +
           ", " + f(relative_error_pct);
  }

  void write_text(std::ostream& os) const {
    os << "metrics" << (label.empty() ? "" : " [" + label + "]")
       << (denormalized ? " (lattice units)" : " (normalized units)")
       << ", n=" << n << " per channel\n";
    os << "  MAE   u=" << mae_u << "  v=" << mae_v << "  all=" << mae_all
       << "\n";
    os << "  MSE   u=" << mse_u << "  v=" << mse_v << "  all=" << mse_all
       << "\n";
    os << "  RMSE  u=" << rmse_u << "  v=" << rmse_v << "  all=" << rmse_all
       << "\n";
    os << "  R2    u=" << r2_u << "  v=" << r2_v << "  all=" << r2_all
       << "\n";
    os << "  relative error: " << relative_error_pct
       << "% (range-normalized MAE, averaged over u and v)\n";
  }
};

}  // namespace texflow::eval
