#pragma once

#include <vector>

#include "mycloth/nn/autograd.hpp"

namespace mycloth::nn {

// Elementwise with broadcasting over (C, H, W): each operand dimension must
// equal the output dimension or be 1. Lower-rank operands are left-padded.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, Real factor);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(const Var& a, Real s) { return scale(a, s); }
inline Var operator*(Real s, const Var& a) { return scale(a, s); }

inline constexpr Real kLeakySlope = 0.2;

Var leaky_relu(const Var& x, Real slope = kLeakySlope);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);

// x: (C, H, W); weight: (O, C, k, k); bias: (O). Zero padding.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding);

// Concatenates (C_i, H, W) tensors along channels.
Var concat_channels(const std::vector<Var>& parts);

Var channel_mean(const Var& x);   // (C, H, W) -> (1, H, W)
Var channel_max(const Var& x);    // (C, H, W) -> (1, H, W)
Var global_avg_pool(const Var& x);  // (C, H, W) -> (C, 1, 1)

// x2 upsampling. Bilinear uses half-pixel centers with edge clamping.
Var upsample2x_bilinear(const Var& x);
Var upsample2x_nearest(const Var& x);

// Mean over non-overlapping factor x factor blocks; H, W must divide.
Var area_downsample(const Var& x, int factor);
Var max_pool2(const Var& x);

// Bilinear sampling of `source` (C, H, W) at (x + dx, y + dy) for every
// output pixel, with flow (2, H, W) holding (dx, dy) in pixels. Sample
// coordinates are clamped to the image (border padding). Differentiable in
// both source and flow.
Var warp(const Var& source, const Var& flow);

// mean(|a - b|) as a one-element tensor.
Var mean_abs_diff(const Var& a, const Var& b);

Var sum_scalars(const std::vector<Var>& scalars);

Real scalar_value(const Var& v);

// Plain-tensor helpers used outside the tape.
Tensor area_downsample(const Tensor& x, int factor);
Tensor upsample2x_bilinear(const Tensor& x);

}  // namespace mycloth::nn
