#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace mycloth::nn {

// 64-bit throughout: training, inference and finite-difference checks share
// one numeric path.
using Real = double;
using Shape = std::vector<int>;

// Eigen picks vectorized code paths (and with them the summation order) by
// buffer address, so every tensor starts on a 64-byte boundary to keep
// results independent of where the allocator put them.
inline constexpr std::size_t kTensorAlignment = 64;

template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kTensorAlignment}));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t{kTensorAlignment}); }
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator&) { return true; }
};

using RealBuffer = std::vector<Real, AlignedAllocator<Real>>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Dense row-major tensor. Images and feature maps are (C, H, W).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0);
  Tensor(Shape shape, const std::vector<Real>& values);
  Tensor(Shape shape, RealBuffer values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t numel() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  Real* data() { return values_.data(); }
  const Real* data() const { return values_.data(); }
  std::span<Real> span() { return values_; }
  std::span<const Real> span() const { return values_; }
  RealBuffer& values() { return values_; }
  const RealBuffer& values() const { return values_; }

  Real& operator[](std::size_t i) { return values_[i]; }
  Real operator[](std::size_t i) const { return values_[i]; }

  // (C, H, W) accessors.
  int channels() const { return shape_[0]; }
  int height() const { return shape_[1]; }
  int width() const { return shape_[2]; }
  Real& at(int c, int y, int x) {
    return values_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  Real at(int c, int y, int x) const {
    return values_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  void fill(Real value);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  RealBuffer values_;
};

Real max_abs_diff(const Tensor& a, const Tensor& b);

// Channel-wise concatenation of two (C, H, W) tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace mycloth::nn
