#pragma once

#include "mycloth/design/raster.hpp"
#include "mycloth/design/types.hpp"

namespace mycloth::cloth_edit {

using design::ColorRGB;
using design::Raster;

inline constexpr double kDefaultEdgeThreshold = 48.0;

// Single-channel {0,255} raster, 255 on cloth edge pixels. Same size as the
// pattern base image; edge pixels are a subset of the cloth mask.
struct EdgeMask {
  Raster mask;
};

struct RecolorParams {
  ColorRGB main_color;    // dominant garment color
  ColorRGB target_color;  // color requested by the user
};

// 3x3 per-channel median over in-mask neighbours, applied only to cloth
// pixels. Used for analysis; the recolored output keeps original pixels.
Raster denoise_median3(const Raster& image, const Raster& cloth_mask);

// Mode of the masked colors after quantizing each channel into 32 buckets of
// width 8; returns the rounded mean color of the winning bucket. Ties go to
// the lexicographically lowest (r, g, b) bucket.
ColorRGB compute_main_color(const Raster& image, const Raster& cloth_mask);

// A cloth pixel is an edge when a 4-neighbour lies outside the mask (or the
// image), or when the Sobel magnitude of its luminance exceeds threshold.
EdgeMask detect_edges(const Raster& image, const Raster& cloth_mask,
                      double threshold = kDefaultEdgeThreshold);

// Non-edge cloth pixels move by (target - main) per channel, clamped to
// [0, 255]; every other pixel is copied unchanged.
Raster recolor(const Raster& image, const Raster& cloth_mask, const EdgeMask& edges,
               const RecolorParams& params);

}  // namespace mycloth::cloth_edit
