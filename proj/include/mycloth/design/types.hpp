#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mycloth/design/raster.hpp"

namespace mycloth::design {

struct ColorRGB {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  // Throws ValidationError when a channel falls outside [0, 255].
  static ColorRGB from_ints(int r, int g, int b);

  friend bool operator==(const ColorRGB&, const ColorRGB&) = default;
};

struct Size {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size&, const Size&) = default;
};

// Axis-aligned pixel rectangle [x, x + w) x [y, y + h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(const Rect& inner) const {
    return inner.x >= x && inner.y >= y && inner.x + inner.w <= x + w && inner.y + inner.h <= y + h;
  }
  bool contains_point(int px, int py) const {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct PaintPlacement {
  int anchor_x = 0;
  int anchor_y = 0;
  double scale = 1.0;

  friend bool operator==(const PaintPlacement&, const PaintPlacement&) = default;
};

// Pixel footprint of a paint of native size `paint` drawn with `placement`:
// round(w * scale) x round(h * scale), at least 1x1.
Size scaled_size(Size paint, double scale);
Rect placement_rect(const PaintPlacement& placement, Size paint);

struct PatternSpec {
  std::string pattern_id;
  std::string display_name;
  Raster base_image;  // RGB
  Raster cloth_mask;  // single channel {0, 255}
  Rect printable_region;
};

}  // namespace mycloth::design
