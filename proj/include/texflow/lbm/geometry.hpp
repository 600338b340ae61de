#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "texflow/common.hpp"
#include "texflow/grid.hpp"
#include "texflow/lbm/d2q9.hpp"

namespace texflow::lbm {

// Textured channel: length L, height H, rectangular textures of height h and
// width w spaced s apart, mirrored on both walls, first texture at `offset`.
// All extents in nodes. h = 0 gives a smooth channel.
struct ChannelSpec {
  int length = 256;
  int height = 64;
  int texture_height = 8;
  int texture_width = 16;
  int texture_spacing = 48;
  int texture_offset = 16;

  void validate() const {
    if (length < 1 || height < 3) {
      throw ConfigError("channel: need length >= 1 and height >= 3");
    }
    if (texture_height < 0 || 2 * texture_height >= height) {
      throw ConfigError("channel: texture height must satisfy 0 <= h < H/2");
    }
    if (texture_height > 0 && texture_width < 1) {
      throw ConfigError("channel: texture width must be >= 1");
    }
    if (texture_spacing < 0) {
      throw ConfigError("channel: texture spacing must be >= 0");
    }
    if (texture_height > 0 && length < texture_width) {
      throw ConfigError("channel: length must be >= texture width");
    }
    if (texture_offset < 0) {
      throw ConfigError("channel: texture offset must be >= 0");
    }
  }
};

// One fluid->solid lattice link. src/dst are flat node indices (y*W + x);
// dst is where bounce_back stages the reflected population so that the
// following stream pass returns it to src.
struct BoundaryLink {
  int32_t src;
  int32_t dst;
  int8_t dir;
};

class SolidMask {
 public:
  SolidMask() = default;
  SolidMask(Grid2D<uint8_t> solid) : solid_(std::move(solid)) {
    build_links();
  }

  int height() const { return solid_.height(); }
  int width() const { return solid_.width(); }
  bool is_solid(int y, int x) const { return solid_.at(y, x) != 0; }
  bool is_fluid(int y, int x) const { return solid_.at(y, x) == 0; }
  const Grid2D<uint8_t>& solid() const { return solid_; }

  const std::vector<BoundaryLink>& links() const { return links_; }

  // Bitmask over directions p whose population slot opposite(p) at this
  // node is written by wall reflection; inlet/outlet closures must not
  // overwrite those slots (wall wins at corners).
  uint16_t claimed_slots(int y, int x) const { return claimed_.at(y, x); }

  size_t solid_count() const {
    size_t n = 0;
    for (size_t i = 0; i < solid_.size(); ++i) n += solid_.data()[i] ? 1 : 0;
    return n;
  }

  size_t fluid_count() const { return solid_.size() - solid_count(); }

 private:
  void build_links() {
    const int h = solid_.height();
    const int w = solid_.width();
    claimed_ = Grid2D<uint16_t>(h, w, 0);
    links_.clear();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (is_solid(y, x)) continue;
        for (int p = 1; p < D2Q9::kQ; ++p) {
          const int ty = y + D2Q9::kEy[p];
          int tx = x + D2Q9::kEx[p];
          if (ty < 0 || ty >= h) continue;  // walls make this unreachable
          bool boundary;
          if (tx < 0 || tx >= w) {
            // Streaming wraps in x; only the solid wall rows act as walls
            // across the inlet/outlet opening (corner tie-break). Interior
            // solids never couple across the x border.
            tx = (tx + w) % w;
            boundary = (ty == 0 || ty == h - 1);
          } else {
            boundary = is_solid(ty, tx);
          }
          if (!boundary) continue;
          links_.push_back({static_cast<int32_t>(y * w + x),
                            static_cast<int32_t>(ty * w + tx),
                            static_cast<int8_t>(p)});
          claimed_.at(y, x) |= static_cast<uint16_t>(1u << D2Q9::kOpposite[p]);
        }
      }
    }
  }

  Grid2D<uint8_t> solid_;
  Grid2D<uint16_t> claimed_;
  std::vector<BoundaryLink> links_;
};

// Rasterizes the channel: top and bottom rows solid, rectangular texture
// blocks of h x w placed with pitch w + s starting at `offset`, attached to
// both walls, clipped at the outlet.
inline SolidMask build_mask(const ChannelSpec& spec) {
  spec.validate();
  const int H = spec.height;
  const int W = spec.length;
  Grid2D<uint8_t> solid(H, W, 0);
  for (int x = 0; x < W; ++x) {
    solid.at(0, x) = 1;
    solid.at(H - 1, x) = 1;
  }
  if (spec.texture_height > 0) {
    const int pitch = spec.texture_width + spec.texture_spacing;  // >= 1
    for (int x0 = spec.texture_offset; x0 < W; x0 += pitch) {
      for (int x = x0; x < std::min(x0 + spec.texture_width, W); ++x) {
        for (int k = 1; k <= spec.texture_height; ++k) {
          solid.at(k, x) = 1;          // bottom wall texture
          solid.at(H - 1 - k, x) = 1;  // top wall texture
        }
      }
    }
  }
  return SolidMask(std::move(solid));
}

}  // namespace texflow::lbm
