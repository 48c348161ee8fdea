#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <vector>
#include <string>

#include "mycloth/nn/module.hpp"
#include "mycloth/nn/ops.hpp"
#include "mycloth/tryon/loss.hpp"
#include "mycloth/tryon/network.hpp"

namespace mycloth::testing {

using nn::Real;
using nn::Tensor;
using nn::Var;

inline Tensor random_tensor(nn::Shape shape, nn::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Two scales, pyramid widths [8, 8], every other layer 2 wide: small enough
// to finite-difference all parameters at 32x32 on one core.
inline tryon::ModelConfig tiny_config(tryon::AblationFlags flags = {}) {
  tryon::ModelConfig c;
  c.num_scales = 2;
  c.fpn_dims = {8, 8};
  c.fpn_out_dim = 8;
  c.afe_hidden_dims = {2, 2, 2, 2};
  c.gen_hidden_dims = {2, 2, 2};
  c.frw_hidden_dim = 2;
  c.channel_reduction = 2;
  c.pose_channels = 3;
  c.flags = flags;
  c.init_seed = 11;
  return c;
}

// Cloth strictly inside (-0.9, 0.9) and y_g = -1 keep every L1 term away
// from its kink.
inline tryon::TryOnSample gradcheck_sample(int size, int pose_channels, std::uint64_t seed) {
  nn::Rng rng(seed);
  tryon::TryOnSample s;
  s.cloth = random_tensor({3, size, size}, rng, -0.9, 0.9);
  s.person = random_tensor({3, size, size}, rng);
  s.pose = random_tensor({pose_channels, size, size}, rng);
  s.agnostic = random_tensor({3, size, size}, rng);
  s.ground_truth = Tensor({3, size, size}, -1.0);
  return s;
}

struct GradCheckEntry {
  std::string name;
  std::size_t index = 0;
  double analytic = 0;
  double numeric = 0;  // central difference
  double forward = 0;  // one-sided slopes; they disagree when a kink lies within the step
  double backward = 0;
  double rel = 0;
};

struct GradCheckResult {
  // rel = |a - n| / max(|a|, |n|, floor) with floor = 1e-3 * max |a| over
  // all parameters: elements whose gradient is tiny next to the largest
  // one are judged on an absolute scale, where central differences are
  // limited by roundoff in the loss.
  double max_rel_error = 0;
  GradCheckEntry worst;
  double floor = 0;
  double max_abs_grad = 0;
  // Same ratio with a fixed 1e-6 floor.
  double max_rel_error_strict = 0;
  std::size_t checked = 0;
  std::vector<GradCheckEntry> over;  // rel above the tolerance
};

// Central differences for every element of every named parameter against
// the tape gradient of `loss`.
inline GradCheckResult check_gradients(const std::vector<std::pair<std::string, Var>>& params,
                                       const std::function<Var()>& loss, double step = 1e-5,
                                       double tolerance = 1e-4) {
  for (const auto& [name, p] : params) {
    Var v = p;
    v.zero_grad();
  }
  nn::backward(loss());
  std::vector<GradCheckEntry> entries;
  GradCheckResult r;
  nn::NoGradGuard no_grad;
  const Real center = nn::scalar_value(loss());
  for (const auto& [name, p] : params) {
    Var v = p;
    const Tensor analytic = v.has_grad() ? v.grad() : Tensor(v.shape());
    for (std::size_t i = 0; i < v.value().numel(); ++i) {
      const Real orig = v.value()[i];
      v.mutable_value()[i] = orig + step;
      const Real up = nn::scalar_value(loss());
      v.mutable_value()[i] = orig - step;
      const Real down = nn::scalar_value(loss());
      v.mutable_value()[i] = orig;
      GradCheckEntry e;
      e.name = name;
      e.index = i;
      e.analytic = analytic[i];
      e.numeric = (up - down) / (2 * step);
      e.forward = (up - center) / step;
      e.backward = (center - down) / step;
      entries.push_back(std::move(e));
      r.max_abs_grad = std::max(r.max_abs_grad, std::abs(analytic[i]));
    }
  }
  r.floor = 1e-3 * r.max_abs_grad;
  for (GradCheckEntry& e : entries) {
    const double diff = std::abs(e.analytic - e.numeric);
    const double big = std::max(std::abs(e.analytic), std::abs(e.numeric));
    r.max_rel_error_strict = std::max(r.max_rel_error_strict, diff / std::max(big, 1e-6));
    e.rel = diff / std::max(big, r.floor);
    ++r.checked;
    if (e.rel > r.max_rel_error) {
      r.max_rel_error = e.rel;
      r.worst = e;
    }
    if (e.rel > tolerance) r.over.push_back(e);
  }
  return r;
}

// Central difference of one element at another step, judged with the same
// floor as the full check.
inline GradCheckEntry reprobe(const std::vector<std::pair<std::string, Var>>& params, const std::function<Var()>& loss,
                              const GradCheckEntry& e, double step, double floor) {
  nn::NoGradGuard no_grad;
  GradCheckEntry out = e;
  for (const auto& [name, p] : params) {
    if (name != e.name) continue;
    Var v = p;
    const Real center = nn::scalar_value(loss());
    const Real orig = v.value()[e.index];
    v.mutable_value()[e.index] = orig + step;
    const Real up = nn::scalar_value(loss());
    v.mutable_value()[e.index] = orig - step;
    const Real down = nn::scalar_value(loss());
    v.mutable_value()[e.index] = orig;
    out.numeric = (up - down) / (2 * step);
    out.forward = (up - center) / step;
    out.backward = (center - down) / step;
    const double big = std::max({std::abs(out.analytic), std::abs(out.numeric), floor});
    out.rel = std::abs(out.analytic - out.numeric) / big;
  }
  return out;
}

}  // namespace mycloth::testing
