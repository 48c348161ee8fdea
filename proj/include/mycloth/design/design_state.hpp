#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mycloth/design/catalog.hpp"
#include "mycloth/design/types.hpp"

namespace mycloth::design {

// Immutable per-session customization record. Mutations go through
// apply_design_update, which returns a new value with revision + 1.
struct DesignState {
  std::string session_id;
  std::string pattern_id;
  std::optional<ColorRGB> target_color;
  std::optional<std::string> paint_asset_id;
  std::optional<PaintPlacement> placement;
  long long revision = 0;

  friend bool operator==(const DesignState&, const DesignState&) = default;
};

// Outer optional: field touched by the update. Inner optional: new value,
// or nullopt to clear it.
template <typename T>
using FieldUpdate = std::optional<std::optional<T>>;

struct DesignUpdate {
  FieldUpdate<ColorRGB> target_color;
  FieldUpdate<std::string> paint_asset_id;
  FieldUpdate<PaintPlacement> placement;

  bool empty() const { return !target_color && !paint_asset_id && !placement; }
};

// What apply_design_update needs to clamp placements: the active pattern's
// printable region and a lookup of a paint asset's native size.
struct PlacementContext {
  Rect printable_region;
  std::function<Size(const std::string& asset_id)> paint_size;  // NotFoundError if unknown
};

// 128-bit random hex id.
std::string new_session_id();

DesignState create_session(const Catalog& catalog, const std::string& pattern_id);

// Throws InvalidStateError when the result would hold a placement without a
// paint asset, ValidationError for a non-positive scale.
DesignState apply_design_update(const DesignState& state, const DesignUpdate& update,
                                const PlacementContext& context);

}  // namespace mycloth::design
