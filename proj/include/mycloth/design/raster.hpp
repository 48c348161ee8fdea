#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mycloth::design {

// Row-major interleaved 8-bit image. channels is 1 (mask), 3 (RGB) or 4 (RGBA).
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, std::uint8_t fill = 0);
  Raster(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<std::uint8_t> data() { return data_; }
  std::span<const std::uint8_t> data() const { return data_; }
  const std::vector<std::uint8_t>& bytes() const { return data_; }

  bool same_size(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// True when every value is 0 or 255 and the raster has one channel.
bool is_binary_mask(const Raster& mask);

Raster resize_bilinear(const Raster& src, int width, int height);

// Adds an opaque alpha channel to an RGB raster; RGBA input is returned as is.
Raster to_rgba(const Raster& src);

}  // namespace mycloth::design
