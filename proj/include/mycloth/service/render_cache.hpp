#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mycloth/design/design_state.hpp"
#include "mycloth/design/raster.hpp"

namespace mycloth::service {

// Bumped whenever render_design can produce different pixels for the same
// state.
inline constexpr const char* kRenderPipelineVersion = "render-v1";

// sha256 over the session id, revision, every state field, the pipeline
// version and the edge threshold.
std::string render_cache_key(const design::DesignState& state, double edge_threshold);

struct RenderedImage {
  design::Raster raster;
  std::vector<std::uint8_t> png;
};

// Thread-safe LRU of rendered images by cache key.
class RenderCache {
 public:
  explicit RenderCache(std::size_t capacity);

  std::shared_ptr<const RenderedImage> get(const std::string& key);
  void put(const std::string& key, std::shared_ptr<const RenderedImage> image);

  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const RenderedImage>>;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace mycloth::service
