#include "mycloth/design/design_state.hpp"

#include <cmath>

#include "mycloth/cloth_edit/placement.hpp"
#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::design {

std::string new_session_id() { return random_hex(16); }

DesignState create_session(const Catalog& catalog, const std::string& pattern_id) {
  if (!catalog.contains(pattern_id)) {
    throw NotFoundError("unknown pattern '" + pattern_id + "'");
  }
  DesignState state;
  state.session_id = new_session_id();
  state.pattern_id = pattern_id;
  return state;
}

DesignState apply_design_update(const DesignState& state, const DesignUpdate& update,
                                const PlacementContext& context) {
  DesignState next = state;
  if (update.target_color) next.target_color = *update.target_color;
  if (update.paint_asset_id) {
    next.paint_asset_id = *update.paint_asset_id;
    if (!next.paint_asset_id) next.placement.reset();
  }
  if (update.placement) {
    if (*update.placement && !next.paint_asset_id) {
      throw InvalidStateError("placement requires a paint asset");
    }
    if (*update.placement) {
      double scale = (*update.placement)->scale;
      if (!(scale > 0) || !std::isfinite(scale)) {
        throw ValidationError("placement scale must be positive", {{"placement.scale", "must be > 0"}});
      }
    }
    next.placement = *update.placement;
  }
  if (next.placement) {
    Size paint = context.paint_size(*next.paint_asset_id);
    next.placement = cloth_edit::clamp_placement(*next.placement, paint, context.printable_region);
  }
  next.revision = state.revision + 1;
  return next;
}

}  // namespace mycloth::design
