#pragma once

#include <optional>

#include "mycloth/nn/tensor.hpp"
#include "mycloth/tryon/config.hpp"

namespace mycloth::tryon {

using nn::Real;
using nn::Tensor;

struct TryOnSample {
  Tensor cloth;     // x_c (3, H, W)
  Tensor person;    // x_h (3, H, W)
  Tensor pose;      // (P, H, W)
  Tensor agnostic;  // (3, H, W)
  std::optional<Tensor> ground_truth;  // y_g (3, H, W)
  // Garment region of the ground truth, (1, H, W) in {0, 1}. Absent means
  // the whole frame supervises the coarse scales.
  std::optional<Tensor> garment_mask;

  int height() const { return cloth.height(); }
  int width() const { return cloth.width(); }

  // Shapes, value ranges ([-1, 1]; mask in {0, 1}) and divisibility by
  // 2^num_scales. Throws ShapeError or ValidationError.
  void validate(const ModelConfig& config) const;
};

}  // namespace mycloth::tryon
