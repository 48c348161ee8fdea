#pragma once

#include <functional>
#include <string>

#include "mycloth/cloth_edit/recolor.hpp"
#include "mycloth/design/catalog.hpp"
#include "mycloth/design/design_state.hpp"

namespace mycloth::cloth_edit {

struct RenderOptions {
  double edge_threshold = kDefaultEdgeThreshold;
};

// Returns the RGBA image of a stored paint asset; throws NotFoundError.
using PaintLookup = std::function<Raster(const std::string& asset_id)>;

// Analysis half of the recolor pipeline: denoise inside the mask, then
// extract the main color and the edge mask from the denoised image.
struct ClothAnalysis {
  ColorRGB main_color;
  EdgeMask edges;
};
ClothAnalysis analyze_cloth(const Raster& image, const Raster& cloth_mask, double edge_threshold);

// base image -> recolor (if a target color is set) -> composite paint (if
// placed). Pure in (state, catalog, assets).
Raster render_design(const design::DesignState& state, const design::Catalog& catalog,
                     const PaintLookup& paints, const RenderOptions& options = {});

}  // namespace mycloth::cloth_edit
