#include "mycloth/design/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"

namespace mycloth::design {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PatternSpec load_entry(const fs::path& dir, const json& entry) {
  PatternSpec spec;
  try {
    spec.pattern_id = entry.at("id").get<std::string>();
    spec.display_name = entry.value("display_name", spec.pattern_id);
    const json& region = entry.at("printable_region");
    spec.printable_region = {region.at("x").get<int>(), region.at("y").get<int>(),
                             region.at("w").get<int>(), region.at("h").get<int>()};
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest entry: " + std::string(e.what()));
  }
  if (spec.pattern_id.empty() || spec.pattern_id.find('/') != std::string::npos) {
    throw ConfigError("invalid pattern id '" + spec.pattern_id + "'");
  }
  fs::path base = dir / spec.pattern_id / "base.png";
  fs::path mask = dir / spec.pattern_id / "mask.png";
  for (const fs::path& p : {base, mask}) {
    if (!fs::is_regular_file(p)) {
      throw ConfigError("pattern '" + spec.pattern_id + "' references missing file " + p.string());
    }
  }
  try {
    spec.base_image = read_image(base);
    spec.cloth_mask = read_mask(mask);
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  if (spec.base_image.channels() == 4) {
    Raster rgb(spec.base_image.width(), spec.base_image.height(), 3);
    for (int y = 0; y < rgb.height(); ++y)
      for (int x = 0; x < rgb.width(); ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = spec.base_image.at(x, y, c);
    spec.base_image = std::move(rgb);
  }
  if (spec.base_image.channels() != 3) {
    throw ConfigError("pattern '" + spec.pattern_id + "' base image must be RGB");
  }
  if (!spec.base_image.same_size(spec.cloth_mask)) {
    throw ConfigError("pattern '" + spec.pattern_id + "' mask size differs from base image");
  }
  const Rect& r = spec.printable_region;
  Rect bounds{0, 0, spec.base_image.width(), spec.base_image.height()};
  if (r.w <= 0 || r.h <= 0 || !bounds.contains(r)) {
    throw ConfigError("pattern '" + spec.pattern_id + "' printable region lies outside the image");
  }
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) {
      if (spec.cloth_mask.at(x, y, 0) != 255) {
        throw ConfigError("pattern '" + spec.pattern_id +
                          "' printable region extends outside the cloth mask");
      }
    }
  }
  return spec;
}

}  // namespace

Catalog Catalog::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("catalog directory not found: " + dir.string());
  }
  Catalog catalog;
  fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) return catalog;
  json manifest;
  try {
    manifest = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("patterns") || !manifest["patterns"].is_array()) {
    throw ConfigError("manifest " + manifest_path.string() + " must contain a 'patterns' array");
  }
  for (const json& entry : manifest["patterns"]) {
    catalog.patterns_.push_back(load_entry(dir, entry));
  }
  std::sort(catalog.patterns_.begin(), catalog.patterns_.end(),
            [](const PatternSpec& a, const PatternSpec& b) { return a.pattern_id < b.pattern_id; });
  for (std::size_t i = 1; i < catalog.patterns_.size(); ++i) {
    if (catalog.patterns_[i].pattern_id == catalog.patterns_[i - 1].pattern_id) {
      throw ConfigError("duplicate pattern id '" + catalog.patterns_[i].pattern_id + "'");
    }
  }
  return catalog;
}

const PatternSpec& Catalog::find(const std::string& pattern_id) const {
  auto it = std::lower_bound(
      patterns_.begin(), patterns_.end(), pattern_id,
      [](const PatternSpec& p, const std::string& id) { return p.pattern_id < id; });
  if (it == patterns_.end() || it->pattern_id != pattern_id) {
    throw NotFoundError("unknown pattern '" + pattern_id + "'");
  }
  return *it;
}

bool Catalog::contains(const std::string& pattern_id) const {
  auto it = std::lower_bound(
      patterns_.begin(), patterns_.end(), pattern_id,
      [](const PatternSpec& p, const std::string& id) { return p.pattern_id < id; });
  return it != patterns_.end() && it->pattern_id == pattern_id;
}

const std::vector<PatternSpec>& list_patterns(const Catalog& catalog) { return catalog.patterns(); }

// --- seed catalog -----------------------------------------------------------

namespace {

struct Silhouette {
  std::string id;
  std::string name;
  ColorRGB color;
  bool long_sleeve = false;
  bool v_neck = false;
};

// Inside test for a flat-lay T-shirt on a 256x256 canvas.
bool inside_shirt(const Silhouette& s, double x, double y) {
  const double cx = 128.0;
  // torso
  bool torso = y >= 48 && y <= 236 && std::abs(x - cx) <= 62;
  // sleeves: slanted quads off the shoulders
  double sleeve_len = s.long_sleeve ? 110.0 : 46.0;
  bool sleeve = false;
  for (int side : {-1, 1}) {
    double dx = (x - cx) * side - 62;  // distance past torso edge
    if (dx >= 0 && dx <= (s.long_sleeve ? 40.0 : 46.0)) {
      double top = 48 + dx * 0.55;
      double bottom = 48 + sleeve_len * 0.55 + (s.long_sleeve ? 110.0 : 44.0) - dx * 0.25;
      if (y >= top && y <= std::min(bottom, s.long_sleeve ? 236.0 : 120.0)) sleeve = true;
    }
  }
  bool inside = torso || sleeve;
  // neckline cut-out
  double nx = x - cx;
  if (s.v_neck) {
    if (y >= 48 && y <= 48 + 34 - std::abs(nx) * 1.3 && std::abs(nx) <= 26) inside = false;
  } else {
    if (nx * nx / (26.0 * 26.0) + (y - 44) * (y - 44) / (18.0 * 18.0) <= 1.0) inside = false;
  }
  return inside;
}

}  // namespace

void write_seed_catalog(const fs::path& dir) {
  const std::vector<Silhouette> shirts = {
      {"crew", "Classic Crew Neck", {200, 200, 204}, false, false},
      {"longsleeve", "Long Sleeve Tee", {58, 92, 160}, true, false},
      {"vneck", "V-Neck Tee", {176, 48, 52}, false, true},
  };
  fs::create_directories(dir);
  json manifest = {{"patterns", json::array()}};
  const int size = 256;
  for (const auto& s : shirts) {
    Raster base(size, size, 3, 255);
    Raster mask(size, size, 1, 0);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (!inside_shirt(s, x + 0.5, y + 0.5)) continue;
        mask.at(x, y, 0) = 255;
        // soft vertical shading plus a faint weave so the fabric is not flat
        double shade = 1.0 - 0.12 * (static_cast<double>(y) / size) + 0.02 * ((x + y) % 3 - 1);
        base.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(s.color.r * shade, 0.0, 255.0));
        base.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(s.color.g * shade, 0.0, 255.0));
        base.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(s.color.b * shade, 0.0, 255.0));
      }
    }
    // hem and collar seams, darker so they read as structure
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (mask.at(x, y, 0) == 0) continue;
        bool hem = y >= 228 && y <= 229;
        bool collar = false;
        for (int dy = -3; dy <= 3 && !collar; ++dy) {
          int yy = y + dy;
          if (yy >= 0 && yy < size && mask.at(x, yy, 0) == 0 && yy < 90 && std::abs(x - 128) < 30) {
            collar = true;
          }
        }
        if (hem || collar) {
          for (int c = 0; c < 3; ++c) base.at(x, y, c) = static_cast<std::uint8_t>(base.at(x, y, c) * 0.55);
        }
      }
    }
    fs::create_directories(dir / s.id);
    write_png(dir / s.id / "base.png", base);
    write_png(dir / s.id / "mask.png", mask);
    manifest["patterns"].push_back({{"id", s.id},
                                    {"display_name", s.name},
                                    {"printable_region", {{"x", 88}, {"y", 96}, {"w", 80}, {"h", 96}}}});
  }
  atomic_write(dir / "manifest.json", manifest.dump(2));
}

}  // namespace mycloth::design
