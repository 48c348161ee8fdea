#include "mycloth/design/raster.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::design {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 0 || height < 0) {
    throw ValidationError("raster dimensions must be non-negative");
  }
  if (channels != 1 && channels != 3 && channels != 4) {
    throw ValidationError("raster channels must be 1, 3 or 4");
  }
}

}  // namespace

Raster::Raster(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ValidationError("raster data length does not match width*height*channels");
  }
}

bool is_binary_mask(const Raster& mask) {
  if (mask.channels() != 1) return false;
  return std::all_of(mask.data().begin(), mask.data().end(),
                     [](std::uint8_t v) { return v == 0 || v == 255; });
}

Raster resize_bilinear(const Raster& src, int width, int height) {
  if (width <= 0 || height <= 0 || src.empty()) {
    throw ValidationError("resize target must be non-empty");
  }
  if (width == src.width() && height == src.height()) return src;
  Raster out(width, height, src.channels());
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
    int y0 = static_cast<int>(std::floor(fy));
    int y1 = std::min(y0 + 1, src.height() - 1);
    double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
      int x0 = static_cast<int>(std::floor(fx));
      int x1 = std::min(x0 + 1, src.width() - 1);
      double wx = fx - x0;
      for (int c = 0; c < src.channels(); ++c) {
        double v = src.at(x0, y0, c) * (1 - wx) * (1 - wy) + src.at(x1, y0, c) * wx * (1 - wy) +
                   src.at(x0, y1, c) * (1 - wx) * wy + src.at(x1, y1, c) * wx * wy;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

Raster to_rgba(const Raster& src) {
  if (src.channels() == 4) return src;
  if (src.channels() != 3) throw ValidationError("to_rgba expects an RGB raster");
  Raster out(src.width(), src.height(), 4, 255);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(x, y, c);
    }
  }
  return out;
}

}  // namespace mycloth::design
