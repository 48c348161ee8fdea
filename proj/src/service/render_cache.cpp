#include "mycloth/service/render_cache.hpp"

#include <fmt/format.h>

#include "mycloth/common/util.hpp"

namespace mycloth::service {

std::string render_cache_key(const design::DesignState& s, double edge_threshold) {
  std::string text = fmt::format("{}|{}|{}|{}", kRenderPipelineVersion, s.session_id, s.revision, s.pattern_id);
  if (s.target_color) text += fmt::format("|c{},{},{}", s.target_color->r, s.target_color->g, s.target_color->b);
  if (s.paint_asset_id) text += "|a" + *s.paint_asset_id;
  if (s.placement) text += fmt::format("|p{},{},{:.17g}", s.placement->anchor_x, s.placement->anchor_y, s.placement->scale);
  text += fmt::format("|t{:.17g}", edge_threshold);
  return sha256_hex(text);
}

RenderCache::RenderCache(std::size_t capacity) : capacity_(capacity) {}

std::shared_ptr<const RenderedImage> RenderCache::get(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void RenderCache::put(const std::string& key, std::shared_ptr<const RenderedImage> image) {
  if (capacity_ == 0) return;
  std::lock_guard lock(mutex_);
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(image);
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, std::move(image));
  index_[key] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t RenderCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}
std::size_t RenderCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}
std::size_t RenderCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace mycloth::service
