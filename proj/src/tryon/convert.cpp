#include "mycloth/tryon/convert.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::tryon {

std::uint8_t real_to_pixel(nn::Real v) {
  v = std::clamp(v, -1.0, 1.0);
  return static_cast<std::uint8_t>(std::lround((v + 1.0) * 127.5));
}

nn::Tensor raster_to_tensor(const design::Raster& image) {
  if (image.channels() < 3) throw ShapeError("expected an RGB or RGBA image");
  nn::Tensor out({3, image.height(), image.width()});
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = pixel_to_real(image.at(x, y, c));
  return out;
}

design::Raster tensor_to_raster(const nn::Tensor& image) {
  if (image.rank() != 3 || image.channels() != 3) {
    throw ShapeError("expected a (3, H, W) tensor, got " + nn::shape_string(image.shape()));
  }
  design::Raster out(image.width(), image.height(), 3);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = real_to_pixel(image.at(c, y, x));
  return out;
}

nn::Tensor mask_to_tensor(const design::Raster& mask) {
  if (!design::is_binary_mask(mask)) throw ValidationError("mask must be one channel with values 0 or 255");
  nn::Tensor out({1, mask.height(), mask.width()});
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out.at(0, y, x) = mask.at(x, y, 0) ? 1.0 : 0.0;
  return out;
}

}  // namespace mycloth::tryon
