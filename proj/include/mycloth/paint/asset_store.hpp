#pragma once

#include <filesystem>
#include <string>

#include "mycloth/paint/paint.hpp"

namespace mycloth::paint {

// File-backed store: <dir>/<asset_id>.png plus <dir>/<asset_id>.json.
class AssetStore {
 public:
  explicit AssetStore(std::filesystem::path dir);

  // Persists under a fresh id and returns it. StorageError when unwritable.
  std::string store(const PaintAsset& asset) const;

  PaintAsset load(const std::string& asset_id) const;  // NotFoundError
  Raster load_image(const std::string& asset_id) const;
  std::filesystem::path image_path(const std::string& asset_id) const;
  bool contains(const std::string& asset_id) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

std::string store_asset(const PaintAsset& asset, const AssetStore& store);

}  // namespace mycloth::paint
