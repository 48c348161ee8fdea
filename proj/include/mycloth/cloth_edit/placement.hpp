#pragma once

#include "mycloth/design/raster.hpp"
#include "mycloth/design/types.hpp"

namespace mycloth::cloth_edit {

using design::PaintPlacement;
using design::Raster;
using design::Rect;
using design::Size;

// Nearest placement whose drawn rectangle lies inside `region`. The anchor
// is moved first; the scale is only reduced (to min(region_w / w,
// region_h / h)) when the paint cannot fit at any anchor. Idempotent.
PaintPlacement clamp_placement(const PaintPlacement& placement, Size paint_size, const Rect& region);

// Resamples `paint` (RGBA) bilinearly to its drawn size and alpha-blends it
// over `base` (RGB) at the anchor. Throws ValidationError if the drawn
// rectangle leaves the base image.
Raster composite_paint(const Raster& base, const Raster& paint, const PaintPlacement& placement);

}  // namespace mycloth::cloth_edit
