#include "mycloth/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::nn {

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  values_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, const std::vector<Real>& values)
    : Tensor(std::move(shape), RealBuffer(values.begin(), values.end())) {}

Tensor::Tensor(Shape shape, RealBuffer values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(values_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

void Tensor::fill(Real value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](Real v) { return std::isfinite(v); });
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Real worst = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError("cannot concatenate " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  RealBuffer values(a.values());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return Tensor({a.channels() + b.channels(), a.height(), a.width()}, std::move(values));
}

}  // namespace mycloth::nn
