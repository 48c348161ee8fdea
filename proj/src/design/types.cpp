#include "mycloth/design/types.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::design {

ColorRGB ColorRGB::from_ints(int r, int g, int b) {
  auto check = [](int v, const char* name) {
    if (v < 0 || v > 255) {
      throw ValidationError("color channel out of range",
                            {{name, "must be an integer in [0, 255]"}});
    }
  };
  check(r, "r");
  check(g, "g");
  check(b, "b");
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

Size scaled_size(Size paint, double scale) {
  auto dim = [scale](int n) {
    return std::max(1, static_cast<int>(std::lround(static_cast<double>(n) * scale)));
  };
  return {dim(paint.width), dim(paint.height)};
}

Rect placement_rect(const PaintPlacement& placement, Size paint) {
  Size s = scaled_size(paint, placement.scale);
  return {placement.anchor_x, placement.anchor_y, s.width, s.height};
}

}  // namespace mycloth::design
