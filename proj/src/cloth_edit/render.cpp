#include "mycloth/cloth_edit/render.hpp"

#include "mycloth/cloth_edit/placement.hpp"
#include "mycloth/common/error.hpp"

namespace mycloth::cloth_edit {

ClothAnalysis analyze_cloth(const Raster& image, const Raster& cloth_mask, double edge_threshold) {
  Raster denoised = denoise_median3(image, cloth_mask);
  return {compute_main_color(denoised, cloth_mask), detect_edges(denoised, cloth_mask, edge_threshold)};
}

Raster render_design(const design::DesignState& state, const design::Catalog& catalog,
                     const PaintLookup& paints, const RenderOptions& options) {
  const design::PatternSpec& pattern = catalog.find(state.pattern_id);
  Raster out = pattern.base_image;
  if (state.target_color) {
    ClothAnalysis analysis = analyze_cloth(pattern.base_image, pattern.cloth_mask, options.edge_threshold);
    out = recolor(pattern.base_image, pattern.cloth_mask, analysis.edges,
                  {analysis.main_color, *state.target_color});
  }
  if (state.placement) {
    if (!state.paint_asset_id) throw InvalidStateError("placement without paint asset");
    Raster paint = paints(*state.paint_asset_id);
    out = composite_paint(out, paint, *state.placement);
  }
  return out;
}

}  // namespace mycloth::cloth_edit
