#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"

namespace texflow::io {

// Linear five-anchor colormap (dark blue - cyan - green - yellow - red).
inline std::array<uint8_t, 3> heat_color(double t) {
  static constexpr double anchors[5][3] = {{13, 8, 135},
                                           {70, 160, 246},
                                           {32, 201, 151},
                                           {253, 231, 37},
                                           {190, 30, 45}};
  t = std::clamp(t, 0.0, 1.0);
  const double u = t * 4.0;
  const int k = std::min(3, static_cast<int>(u));
  const double f = u - k;
  std::array<uint8_t, 3> c;
  for (int i = 0; i < 3; ++i) {
    c[static_cast<size_t>(i)] = static_cast<uint8_t>(
        anchors[k][i] + f * (anchors[k + 1][i] - anchors[k][i]) + 0.5);
  }
  return c;
}

// Binary portable pixmap with a linear colormap over [min, max]; the value
// range goes into `<path>.range.txt`. Row 0 of the grid is drawn at the
// bottom of the image.
template <typename T>
void write_heatmap_ppm(const Grid2D<T>& field, const std::string& path) {
  double mn = field.data()[0], mx = field.data()[0];
  for (size_t i = 1; i < field.size(); ++i) {
    mn = std::min(mn, static_cast<double>(field.data()[i]));
    mx = std::max(mx, static_cast<double>(field.data()[i]));
  }
  const double span = mx > mn ? mx - mn : 1.0;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write heatmap: " + path);
  os << "P6\n" << field.width() << ' ' << field.height() << "\n255\n";
  for (int y = field.height() - 1; y >= 0; --y) {
    for (int x = 0; x < field.width(); ++x) {
      const auto c = heat_color((field.at(y, x) - mn) / span);
      os.write(reinterpret_cast<const char*>(c.data()), 3);
    }
  }
  if (!os) throw IoError("heatmap write failed: " + path);

  std::ofstream side(path + ".range.txt");
  if (!side) throw IoError("cannot write heatmap sidecar: " + path);
  side << "min: " << mn << "\nmax: " << mx << "\n";
}

}  // namespace texflow::io
