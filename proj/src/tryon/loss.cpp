#include "mycloth/tryon/loss.hpp"

#include <cmath>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/archive.hpp"

namespace mycloth::tryon {

namespace {

Var frozen_conv(const Var& x, const Var& w, const Var& b) { return nn::conv2d(x, w, b, 1, 1); }

void init_frozen(Var& weight, Var& bias, int in, int out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (in * 9));
  Tensor w({out, in, 3, 3});
  for (auto& v : w.values()) v = rng.uniform(-bound, bound);
  weight = nn::constant(std::move(w));
  bias = nn::constant(Tensor({out}));
}

}  // namespace

std::vector<Var> IdentityExtractor::taps(const Var& image) const {
  return std::vector<Var>(kPerceptualTaps, image);
}

RandomConvExtractor::RandomConvExtractor(std::uint64_t seed, int width) {
  Rng rng(seed);
  int prev = 3;
  for (int i = 0; i < kPerceptualTaps; ++i) {
    Layer layer;
    init_frozen(layer.weight, layer.bias, prev, width, rng);
    layers_.push_back(std::move(layer));
    prev = width;
  }
}

std::vector<Var> RandomConvExtractor::taps(const Var& image) const {
  std::vector<Var> out;
  Var h = image;
  for (const Layer& layer : layers_) {
    h = nn::leaky_relu(frozen_conv(h, layer.weight, layer.bias));
    out.push_back(h);
  }
  return out;
}

Vgg19Extractor::Vgg19Extractor(std::uint64_t seed) {
  // Layers per block and widths of the standard 19-layer configuration;
  // block 5 stops at conv5_2, the last tap.
  const int counts[5] = {2, 2, 4, 4, 2};
  const int widths[5] = {64, 128, 256, 512, 512};
  Rng rng(seed);
  int prev = 3;
  for (int b = 0; b < 5; ++b) {
    std::vector<Layer> block;
    for (int i = 0; i < counts[b]; ++i) {
      Layer layer;
      layer.name = "conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1);
      init_frozen(layer.weight, layer.bias, prev, widths[b], rng);
      block.push_back(std::move(layer));
      prev = widths[b];
    }
    blocks_.push_back(std::move(block));
  }
}

void Vgg19Extractor::load(const std::filesystem::path& archive) {
  nn::NamedTensors tensors = nn::load_tensors(archive);
  for (auto& block : blocks_) {
    for (auto& layer : block) {
      for (auto [suffix, var] : {std::pair<const char*, Var*>{".weight", &layer.weight}, {".bias", &layer.bias}}) {
        auto it = tensors.find(layer.name + suffix);
        if (it == tensors.end()) throw LoadError(archive.string() + " lacks " + layer.name + suffix);
        if (it->second.shape() != var->shape()) throw LoadError(layer.name + suffix + " has the wrong shape");
        *var = nn::constant(it->second);
      }
    }
  }
  pretrained_ = true;
}

std::vector<Var> Vgg19Extractor::taps(const Var& image) const {
  static const double mean[3] = {0.485, 0.456, 0.406};
  static const double stdev[3] = {0.229, 0.224, 0.225};
  Tensor s({3, 1, 1}), o({3, 1, 1});
  for (int c = 0; c < 3; ++c) {
    // ((x + 1) / 2 - mean) / std
    s[c] = 0.5 / stdev[c];
    o[c] = (0.5 - mean[c]) / stdev[c];
  }
  Var h = nn::add(nn::mul(image, nn::constant(s)), nn::constant(o));
  std::vector<Var> out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b > 0 && h.value().height() >= 2 && h.value().width() >= 2) h = nn::max_pool2(h);
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
      h = nn::relu(frozen_conv(h, blocks_[b][i].weight, blocks_[b][i].bias));
      if (i == 1) out.push_back(h);
    }
  }
  return out;
}

Var loss_similarity(const Var& prediction, const Var& target) { return nn::mean_abs_diff(prediction, target); }

Var loss_perceptual(const Var& prediction, const Var& target, const FeatureExtractor& extractor) {
  std::vector<Var> a = extractor.taps(prediction);
  std::vector<Var> b = extractor.taps(target);
  if (a.size() != kPerceptualTaps || b.size() != kPerceptualTaps) {
    throw ContractError("extractor '" + extractor.name() + "' yields " + std::to_string(a.size()) +
                        " taps, expected 5");
  }
  std::vector<Var> terms;
  for (int i = 0; i < kPerceptualTaps; ++i) terms.push_back(nn::mean_abs_diff(a[i], b[i]));
  return nn::sum_scalars(terms);
}

Var weighted_scale_sum(const std::vector<ScaleLoss>& terms, double lambda_s, double lambda_per) {
  std::vector<Var> weighted;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double weight = static_cast<double>(i + 2);  // n + 1 with n = i + 1
    weighted.push_back(nn::scale(terms[i].similarity, weight * lambda_s));
    weighted.push_back(nn::scale(terms[i].perceptual, weight * lambda_per));
  }
  return nn::sum_scalars(weighted);
}

LossBreakdown loss_total(const TryOnOutputs& outputs, const TryOnSample& sample, const ModelConfig& config,
                         const FeatureExtractor& extractor) {
  const int n_scales = config.num_scales;
  if (static_cast<int>(outputs.warped_cloth_images.size()) != n_scales ||
      static_cast<int>(outputs.fused_flows.size()) != n_scales || !outputs.y_p.defined()) {
    throw ContractError("loss expects outputs for " + std::to_string(n_scales) + " scales, got " +
                        std::to_string(outputs.warped_cloth_images.size()));
  }
  if (!sample.ground_truth) throw ValidationError("sample has no ground truth", {{"ground_truth", "missing"}});
  const Tensor& y_g = *sample.ground_truth;
  Tensor mask = sample.garment_mask ? *sample.garment_mask : Tensor({1, y_g.height(), y_g.width()}, 1.0);

  std::vector<ScaleLoss> terms;
  LossBreakdown out;
  for (int n = 1; n < n_scales; ++n) {
    const int level = n_scales - n;
    const int factor = 1 << level;
    Var m = nn::constant(nn::area_downsample(mask, factor));
    Var pred = nn::mul(outputs.warped_cloth_images[static_cast<std::size_t>(n)], m);
    Var target = nn::mul(nn::constant(nn::area_downsample(y_g, factor)), m);
    terms.push_back({loss_similarity(pred, target), loss_perceptual(pred, target, extractor)});
  }
  Var y_g_var = nn::constant(y_g);
  terms.push_back({loss_similarity(outputs.y_p, y_g_var), loss_perceptual(outputs.y_p, y_g_var, extractor)});
  for (const ScaleLoss& t : terms) {
    out.similarity.push_back(nn::scalar_value(t.similarity));
    out.perceptual.push_back(nn::scalar_value(t.perceptual));
  }
  out.total = weighted_scale_sum(terms, config.lambda_s, config.lambda_per);
  return out;
}

}  // namespace mycloth::tryon
