#pragma once

#include <memory>
#include <vector>

#include "mycloth/nn/module.hpp"
#include "mycloth/nn/ops.hpp"
#include "mycloth/tryon/config.hpp"
#include "mycloth/tryon/sample.hpp"

namespace mycloth::tryon {

using nn::Conv2d;
using nn::Rng;
using nn::Var;

// Stride-2 encoder with lateral 1x1 convs and a nearest-neighbour top-down
// path. Levels are returned fine to coarse: level i has spatial dims
// (H / 2^i, W / 2^i) and fpn_out_dim channels.
class FeaturePyramidNet : public nn::Module {
 public:
  FeaturePyramidNet(int in_channels, const std::vector<int>& stage_dims, int out_dim, Rng& rng);

  std::vector<Var> operator()(const Var& x) const;
  int num_levels() const { return static_cast<int>(down_.size()); }
  int in_channels() const { return in_channels_; }

 private:
  int in_channels_;
  std::vector<std::unique_ptr<Conv2d>> down_;
  std::vector<std::unique_ptr<Conv2d>> refine_;
  std::vector<std::unique_ptr<Conv2d>> lateral_;
  std::vector<std::unique_ptr<Conv2d>> smooth_;
};

// Four 3x3 conv + leaky ReLU layers, then a 3x3 projection to (dx, dy).
class FlowEstimator : public nn::Module {
 public:
  FlowEstimator(int in_channels, const std::vector<int>& hidden_dims, bool zero_head, Rng& rng);

  Var operator()(const Var& features) const;
  std::vector<int> hidden_widths() const;
  const std::vector<std::unique_ptr<Conv2d>>& hidden() const { return hidden_; }
  Conv2d& head() { return *head_; }
  const Conv2d& head() const { return *head_; }

 private:
  std::vector<std::unique_ptr<Conv2d>> hidden_;
  std::unique_ptr<Conv2d> head_;
};

// Flow rectification: spatial attention from channel-pooled (feature, flow)
// maps, fusion conv, squeeze-excitation channel attention, and a residual
// delta added to the input flow.
class FlowRectifier : public nn::Module {
 public:
  FlowRectifier(int feature_channels, int hidden_dim, int reduction, bool zero_delta, Rng& rng);

  Var operator()(const Var& feature, const Var& flow) const;
  Conv2d& delta() { return *delta_; }

 private:
  std::unique_ptr<Conv2d> spatial_;
  std::unique_ptr<Conv2d> fuse_;
  std::unique_ptr<Conv2d> squeeze_;
  std::unique_ptr<Conv2d> excite_;
  std::unique_ptr<Conv2d> delta_;
};

struct WarpResult {
  Var flow;    // fused flow (2, h, w)
  Var warped;  // cloth features warped by `flow`
};

// One per-scale estimation-and-warping block. With attention on, cloth and
// human flows are estimated separately, rectified, used to warp the cloth
// features, and fused by a third estimator. With it off a single estimator
// reads the concatenated features (optionally followed by one rectifier).
class WarpBlock : public nn::Module {
 public:
  WarpBlock(int feature_channels, const ModelConfig& config, bool attention, bool rectify, Rng& rng);

  // `prior` is the fused flow of the next coarser scale, or undefined.
  WarpResult operator()(const Var& f_c, const Var& f_h, const Var& prior) const;

  bool attention() const { return attention_; }
  bool rectify() const { return rectify_; }
  const FlowEstimator& fuse_estimator() const { return *afe_fuse_; }
  const FlowEstimator* cloth_estimator() const { return afe_c_.get(); }
  const FlowEstimator* human_estimator() const { return afe_h_.get(); }

  // Zeroes every flow-producing head and rectifier delta.
  void zero_flow_heads();
  // Re-draws head and delta weights in [-scale, scale]; estimator biases
  // become 0.5 px, delta biases 0. Used by gradient checks, where zero heads
  // put every sample exactly on a bilinear kink.
  void randomize_flow_heads(Rng& rng, double scale);

 private:
  bool attention_;
  bool rectify_;
  std::unique_ptr<FlowEstimator> afe_c_;
  std::unique_ptr<FlowEstimator> afe_h_;
  std::unique_ptr<FlowEstimator> afe_fuse_;
  std::unique_ptr<FlowRectifier> frw_c_;
  std::unique_ptr<FlowRectifier> frw_h_;
  std::unique_ptr<FlowRectifier> frw_;
};

// Full-resolution generation: one shared encoder for cloth and agnostic
// image, a warp block on the latents, and a shallow decoder with tanh.
class Generator : public nn::Module {
 public:
  Generator(const ModelConfig& config, Rng& rng);

  Var encode(const Var& image) const;
  // finest_flow: fused flow at half resolution. Throws ContractError if
  // undefined.
  Var operator()(const Var& cloth, const Var& agnostic, const Var& finest_flow) const;

  const nn::Module& encoder() const { return encoder_; }
  const std::vector<std::unique_ptr<Conv2d>>& encoder_layers() const { return encoder_layers_; }
  const std::vector<std::unique_ptr<Conv2d>>& decoder_layers() const { return decoder_layers_; }
  WarpBlock& warp_block() { return *warp_; }
  const WarpBlock& warp_block() const { return *warp_; }

 private:
  class Encoder : public nn::Module {
   public:
    void add(const std::string& name, Conv2d& conv) { register_module(name, conv); }
  };

  std::vector<std::unique_ptr<Conv2d>> encoder_layers_;
  Encoder encoder_;
  std::unique_ptr<WarpBlock> warp_;
  std::vector<std::unique_ptr<Conv2d>> decoder_layers_;
};

struct TryOnOutputs {
  Var y_p;
  // All lists run coarse to fine; entry k belongs to pyramid level N - k.
  std::vector<Var> fused_flows;
  std::vector<Var> warped_cloth_features;
  std::vector<Var> warped_cloth_images;  // cloth downsampled to the level, warped
  std::vector<Var> cloth_features;       // unwarped cloth pyramid
};

class TryOnNet : public nn::Module {
 public:
  explicit TryOnNet(const ModelConfig& config);

  // Validates the sample, then runs pyramid -> coarse-to-fine warp cascade
  // -> generation.
  TryOnOutputs forward(const TryOnSample& sample) const;

  const ModelConfig& config() const { return config_; }
  const FeaturePyramidNet& cloth_fpn() const { return *cloth_fpn_; }
  const FeaturePyramidNet& human_fpn() const { return *human_fpn_; }
  // level in [1, N], 1 = finest.
  const WarpBlock& warp_block(int level) const { return *warp_blocks_.at(static_cast<std::size_t>(level - 1)); }
  WarpBlock& warp_block(int level) { return *warp_blocks_.at(static_cast<std::size_t>(level - 1)); }
  const Generator& generator() const { return *generator_; }
  Generator& generator() { return *generator_; }

  void randomize_flow_heads(std::uint64_t seed, double scale);

 private:
  ModelConfig config_;
  std::unique_ptr<FeaturePyramidNet> cloth_fpn_;
  std::unique_ptr<FeaturePyramidNet> human_fpn_;
  std::vector<std::unique_ptr<WarpBlock>> warp_blocks_;
  std::unique_ptr<Generator> generator_;
};

// Bilinear x2 upsampling of a coarser flow with displacements doubled to
// the finer pixel grid.
Var upsample_prior_flow(const Var& prior);

}  // namespace mycloth::tryon
