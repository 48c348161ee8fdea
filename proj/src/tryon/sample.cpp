#include "mycloth/tryon/sample.hpp"

#include <cmath>
#include <string>

#include "mycloth/common/error.hpp"

namespace mycloth::tryon {

namespace {

void check_image(const Tensor& t, const char* name, int channels, int h, int w) {
  if (t.rank() != 3 || t.channels() != channels || t.height() != h || t.width() != w) {
    throw ShapeError(std::string(name) + " has shape " + nn::shape_string(t.shape()) + ", expected (" +
                     std::to_string(channels) + ", " + std::to_string(h) + ", " + std::to_string(w) + ")");
  }
}

void check_range(const Tensor& t, const char* name) {
  for (std::size_t i = 0; i < t.numel(); ++i) {
    if (!std::isfinite(t[i]) || t[i] < -1.0 || t[i] > 1.0) {
      throw ValidationError(std::string(name) + " values must lie in [-1, 1]", {{name, "out of range"}});
    }
  }
}

}  // namespace

void TryOnSample::validate(const ModelConfig& config) const {
  if (cloth.rank() != 3) throw ShapeError("cloth must be (3, H, W), got " + nn::shape_string(cloth.shape()));
  const int h = cloth.height(), w = cloth.width();
  const int m = config.spatial_multiple();
  if (h <= 0 || w <= 0 || h % m != 0 || w % m != 0) {
    throw ShapeError("spatial dims " + std::to_string(h) + "x" + std::to_string(w) + " are not divisible by " +
                     std::to_string(m));
  }
  check_image(cloth, "cloth", 3, h, w);
  check_image(person, "person", 3, h, w);
  check_image(pose, "pose", config.pose_channels, h, w);
  check_image(agnostic, "agnostic", 3, h, w);
  check_range(cloth, "cloth");
  check_range(person, "person");
  check_range(pose, "pose");
  check_range(agnostic, "agnostic");
  if (ground_truth) {
    check_image(*ground_truth, "ground_truth", 3, h, w);
    check_range(*ground_truth, "ground_truth");
  }
  if (garment_mask) {
    check_image(*garment_mask, "garment_mask", 1, h, w);
    for (std::size_t i = 0; i < garment_mask->numel(); ++i) {
      Real v = (*garment_mask)[i];
      if (v != 0.0 && v != 1.0) throw ValidationError("garment_mask must be binary", {{"garment_mask", "not binary"}});
    }
  }
}

}  // namespace mycloth::tryon
