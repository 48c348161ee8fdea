#include "mycloth/cloth_edit/placement.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::cloth_edit {

PaintPlacement clamp_placement(const PaintPlacement& placement, Size paint_size, const Rect& region) {
  if (paint_size.width <= 0 || paint_size.height <= 0) {
    throw ValidationError("paint size must be positive");
  }
  PaintPlacement out = placement;
  Size drawn = design::scaled_size(paint_size, out.scale);
  if (drawn.width > region.w || drawn.height > region.h) {
    out.scale = std::min(static_cast<double>(region.w) / paint_size.width,
                         static_cast<double>(region.h) / paint_size.height);
    drawn = design::scaled_size(paint_size, out.scale);
  }
  out.anchor_x = std::clamp(out.anchor_x, region.x, region.x + region.w - drawn.width);
  out.anchor_y = std::clamp(out.anchor_y, region.y, region.y + region.h - drawn.height);
  return out;
}

Raster composite_paint(const Raster& base, const Raster& paint, const PaintPlacement& placement) {
  if (base.channels() != 3) throw ValidationError("base image must be RGB");
  if (paint.channels() != 4) throw ValidationError("paint must be RGBA");
  Size native{paint.width(), paint.height()};
  Rect rect = design::placement_rect(placement, native);
  if (!Rect{0, 0, base.width(), base.height()}.contains(rect)) {
    throw ValidationError("paint placement leaves the base image",
                          {{"placement", "must be clamped to the printable region"}});
  }
  Raster scaled = design::resize_bilinear(paint, rect.w, rect.h);
  Raster out = base;
  for (int y = 0; y < rect.h; ++y) {
    for (int x = 0; x < rect.w; ++x) {
      double alpha = scaled.at(x, y, 3) / 255.0;
      for (int c = 0; c < 3; ++c) {
        double v = alpha * scaled.at(x, y, c) + (1.0 - alpha) * base.at(rect.x + x, rect.y + y, c);
        out.at(rect.x + x, rect.y + y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace mycloth::cloth_edit
