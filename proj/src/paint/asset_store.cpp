#include "mycloth/paint/asset_store.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"

namespace mycloth::paint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isxdigit(c); });
}

}  // namespace

AssetStore::AssetStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create asset directory " + dir_.string());
}

std::string AssetStore::store(const PaintAsset& asset) const {
  if (asset.image.channels() != 4 || asset.image.empty()) {
    throw ValidationError("paint asset image must be a non-empty RGBA raster");
  }
  if (asset.refined_prompt.empty()) {
    throw ValidationError("paint asset requires a refined prompt");
  }
  // Ids are fresh per call, so each key has exactly one writer.
  std::string id = random_hex(16);
  json meta = {{"asset_id", id},
               {"raw_prompt", asset.raw_prompt},
               {"refined_prompt", asset.refined_prompt},
               {"generator_name", asset.generator_name},
               {"created_at", asset.created_at},
               {"width", asset.image.width()},
               {"height", asset.image.height()}};
  // Image first: a sidecar is only visible once its PNG exists.
  atomic_write(image_path(id), design::encode_png(asset.image));
  atomic_write(dir_ / (id + ".json"), meta.dump(2));
  return id;
}

fs::path AssetStore::image_path(const std::string& asset_id) const { return dir_ / (asset_id + ".png"); }

bool AssetStore::contains(const std::string& asset_id) const {
  return valid_id(asset_id) && fs::exists(dir_ / (asset_id + ".json"));
}

PaintAsset AssetStore::load(const std::string& asset_id) const {
  if (!contains(asset_id)) throw NotFoundError("unknown paint asset '" + asset_id + "'");
  json meta;
  try {
    meta = json::parse(read_text_file(dir_ / (asset_id + ".json")));
  } catch (const json::exception& e) {
    throw StorageError("corrupt asset metadata for " + asset_id + ": " + e.what());
  }
  PaintAsset asset;
  asset.asset_id = meta.at("asset_id").get<std::string>();
  asset.raw_prompt = meta.at("raw_prompt").get<std::string>();
  asset.refined_prompt = meta.at("refined_prompt").get<std::string>();
  asset.generator_name = meta.at("generator_name").get<std::string>();
  asset.created_at = meta.at("created_at").get<std::string>();
  asset.image = load_image(asset_id);
  return asset;
}

Raster AssetStore::load_image(const std::string& asset_id) const {
  if (!contains(asset_id)) throw NotFoundError("unknown paint asset '" + asset_id + "'");
  return design::to_rgba(design::read_image(image_path(asset_id)));
}

std::string store_asset(const PaintAsset& asset, const AssetStore& store) { return store.store(asset); }

}  // namespace mycloth::paint
