#pragma once

#include <cstdint>

#include "mycloth/design/raster.hpp"
#include "mycloth/nn/tensor.hpp"

namespace mycloth::tryon {

// 8-bit v <-> v / 127.5 - 1.
inline nn::Real pixel_to_real(std::uint8_t v) { return static_cast<nn::Real>(v) / 127.5 - 1.0; }
std::uint8_t real_to_pixel(nn::Real v);  // clamps to [-1, 1], rounds

// RGB or RGBA raster -> (3, H, W) in [-1, 1]; alpha is dropped.
nn::Tensor raster_to_tensor(const design::Raster& image);
// (3, H, W) -> RGB raster.
design::Raster tensor_to_raster(const nn::Tensor& image);
// One-channel {0, 255} mask -> (1, H, W) in {0, 1}.
nn::Tensor mask_to_tensor(const design::Raster& mask);

}  // namespace mycloth::tryon
