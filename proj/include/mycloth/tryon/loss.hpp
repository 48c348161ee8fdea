#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mycloth/nn/module.hpp"
#include "mycloth/tryon/network.hpp"

namespace mycloth::tryon {

inline constexpr int kPerceptualTaps = 5;

// Frozen feature extractor for the perceptual loss. Its weights never
// receive gradients; the input does.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<Var> taps(const Var& image) const = 0;
  virtual std::string name() const = 0;
};

// Every tap is the input itself.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::vector<Var> taps(const Var& image) const override;
  std::string name() const override { return "identity"; }
};

// Five seeded 3x3 conv + leaky layers without downsampling; tap after each.
class RandomConvExtractor final : public FeatureExtractor {
 public:
  explicit RandomConvExtractor(std::uint64_t seed, int width = 8);
  std::vector<Var> taps(const Var& image) const override;
  std::string name() const override { return "random-conv"; }

 private:
  struct Layer {
    Var weight;
    Var bias;
  };
  std::vector<Layer> layers_;
};

// 19-layer VGG trunk up to conv5_2, tapping relu1_2, relu2_2, relu3_2,
// relu4_2 and relu5_2. Inputs in [-1, 1] are mapped to ImageNet-normalized
// RGB. Pooling is skipped once a side would drop below 1 pixel so coarse
// pyramid levels still produce every tap.
class Vgg19Extractor final : public FeatureExtractor {
 public:
  // Random (seeded) weights; use load() for pretrained ones.
  explicit Vgg19Extractor(std::uint64_t seed = 19);
  // Archive with "conv{block}_{index}.weight"/".bias" entries.
  void load(const std::filesystem::path& archive);
  bool pretrained() const { return pretrained_; }

  std::vector<Var> taps(const Var& image) const override;
  std::string name() const override { return "vgg19"; }

 private:
  struct Layer {
    std::string name;
    Var weight;
    Var bias;
  };
  std::vector<std::vector<Layer>> blocks_;
  bool pretrained_ = false;
};

// mean |a - b|
Var loss_similarity(const Var& prediction, const Var& target);
// sum over taps of mean |phi_i(a) - phi_i(b)|. ContractError unless the
// extractor yields exactly 5 taps.
Var loss_perceptual(const Var& prediction, const Var& target, const FeatureExtractor& extractor);

struct ScaleLoss {
  Var similarity;
  Var perceptual;
};

// sum_{n=1..N} (n + 1) * (lambda_s * L_s^n + lambda_per * L_per^n), with
// terms[0] the coarsest scale (n = 1).
Var weighted_scale_sum(const std::vector<ScaleLoss>& terms, double lambda_s, double lambda_per);

struct LossBreakdown {
  Var total;
  // Per scale, coarse to fine; the last entry compares y_p with y_g.
  std::vector<double> similarity;
  std::vector<double> perceptual;

  double final_similarity() const { return similarity.back(); }
};

// Scale n = N compares y_p with y_g. Scales n = 1 .. N-1 compare the cloth
// warped at pyramid level N - n with the ground truth at that level, both
// masked by the (area-downsampled) garment mask. ContractError if the
// outputs do not hold N scales; ValidationError without ground truth.
LossBreakdown loss_total(const TryOnOutputs& outputs, const TryOnSample& sample, const ModelConfig& config,
                         const FeatureExtractor& extractor);

}  // namespace mycloth::tryon
