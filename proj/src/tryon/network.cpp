#include "mycloth/tryon/network.hpp"

#include <string>

#include "mycloth/common/error.hpp"

namespace mycloth::tryon {

using nn::leaky_relu;

namespace {

std::unique_ptr<Conv2d> conv3(int in, int out, Rng& rng) { return std::make_unique<Conv2d>(in, out, 3, 1, 1, rng); }
std::unique_ptr<Conv2d> conv1(int in, int out, Rng& rng) { return std::make_unique<Conv2d>(in, out, 1, 1, 0, rng); }

void redraw(Conv2d& conv, Rng& rng, double scale, double bias) {
  Var w = conv.weight();
  for (auto& v : w.mutable_value().values()) v = rng.uniform(-scale, scale);
  Var b = conv.bias();
  b.mutable_value().fill(bias);
}

}  // namespace

Var upsample_prior_flow(const Var& prior) { return nn::scale(nn::upsample2x_bilinear(prior), 2.0); }

// --- pyramid -----------------------------------------------------------------

FeaturePyramidNet::FeaturePyramidNet(int in_channels, const std::vector<int>& stage_dims, int out_dim, Rng& rng)
    : in_channels_(in_channels) {
  int prev = in_channels;
  for (std::size_t i = 0; i < stage_dims.size(); ++i) {
    down_.push_back(std::make_unique<Conv2d>(prev, stage_dims[i], 3, 2, 1, rng));
    refine_.push_back(conv3(stage_dims[i], stage_dims[i], rng));
    prev = stage_dims[i];
  }
  for (int d : stage_dims) lateral_.push_back(conv1(d, out_dim, rng));
  for (std::size_t i = 0; i < stage_dims.size(); ++i) smooth_.push_back(conv3(out_dim, out_dim, rng));
  for (std::size_t i = 0; i < stage_dims.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    register_module("down" + n, *down_[i]);
    register_module("refine" + n, *refine_[i]);
    register_module("lateral" + n, *lateral_[i]);
    register_module("smooth" + n, *smooth_[i]);
  }
}

std::vector<Var> FeaturePyramidNet::operator()(const Var& x) const {
  if (x.value().rank() != 3 || x.value().channels() != in_channels_) {
    throw ShapeError("pyramid expects " + std::to_string(in_channels_) + " input channels, got " +
                     nn::shape_string(x.shape()));
  }
  const int n = num_levels();
  const int m = 1 << n;
  if (x.value().height() % m != 0 || x.value().width() % m != 0) {
    throw ShapeError("pyramid input " + nn::shape_string(x.shape()) + " is not divisible by " + std::to_string(m));
  }
  std::vector<Var> bottom_up;
  Var h = x;
  for (int i = 0; i < n; ++i) {
    h = leaky_relu((*down_[i])(h));
    h = leaky_relu((*refine_[i])(h));
    bottom_up.push_back(h);
  }
  std::vector<Var> levels(n);
  Var top;
  for (int i = n - 1; i >= 0; --i) {
    Var lat = (*lateral_[i])(bottom_up[i]);
    top = top.defined() ? nn::add(lat, nn::upsample2x_nearest(top)) : lat;
    levels[i] = (*smooth_[i])(top);
  }
  return levels;
}

// --- flow estimator ----------------------------------------------------------

FlowEstimator::FlowEstimator(int in_channels, const std::vector<int>& hidden_dims, bool zero_head, Rng& rng) {
  int prev = in_channels;
  for (int d : hidden_dims) {
    hidden_.push_back(conv3(prev, d, rng));
    prev = d;
  }
  head_ = conv3(prev, 2, rng);
  if (zero_head) head_->zero();
  for (std::size_t i = 0; i < hidden_.size(); ++i) register_module("conv" + std::to_string(i + 1), *hidden_[i]);
  register_module("head", *head_);
}

Var FlowEstimator::operator()(const Var& features) const {
  Var h = features;
  for (const auto& conv : hidden_) h = leaky_relu((*conv)(h));
  return (*head_)(h);
}

std::vector<int> FlowEstimator::hidden_widths() const {
  std::vector<int> out;
  for (const auto& conv : hidden_) out.push_back(conv->out_channels());
  return out;
}

// --- rectifier ---------------------------------------------------------------

FlowRectifier::FlowRectifier(int feature_channels, int hidden_dim, int reduction, bool zero_delta, Rng& rng) {
  const int squeezed = std::max(1, hidden_dim / reduction);
  spatial_ = conv3(2, 1, rng);
  fuse_ = conv3(feature_channels + 2, hidden_dim, rng);
  squeeze_ = conv1(hidden_dim, squeezed, rng);
  excite_ = conv1(squeezed, hidden_dim, rng);
  delta_ = conv3(hidden_dim, 2, rng);
  if (zero_delta) delta_->zero();
  register_module("spatial", *spatial_);
  register_module("fuse", *fuse_);
  register_module("squeeze", *squeeze_);
  register_module("excite", *excite_);
  register_module("delta", *delta_);
}

Var FlowRectifier::operator()(const Var& feature, const Var& flow) const {
  if (flow.value().rank() != 3 || flow.value().channels() != 2) {
    throw ShapeError("flow must be (2, h, w), got " + nn::shape_string(flow.shape()));
  }
  if (feature.value().height() != flow.value().height() || feature.value().width() != flow.value().width()) {
    throw ShapeError("feature " + nn::shape_string(feature.shape()) + " and flow " + nn::shape_string(flow.shape()) +
                     " differ in spatial dims");
  }
  Var joint = nn::concat_channels({feature, flow});
  Var pooled = nn::concat_channels({nn::channel_mean(joint), nn::channel_max(joint)});
  Var attention = nn::sigmoid((*spatial_)(pooled));
  Var attended = nn::mul(feature, attention);
  Var fused = leaky_relu((*fuse_)(nn::concat_channels({attended, flow})));
  Var gate = nn::sigmoid((*excite_)(nn::relu((*squeeze_)(nn::global_avg_pool(fused)))));
  Var delta = (*delta_)(nn::mul(fused, gate));
  return nn::add(flow, delta);
}

// --- warp block --------------------------------------------------------------

WarpBlock::WarpBlock(int feature_channels, const ModelConfig& config, bool attention, bool rectify, Rng& rng)
    : attention_(attention), rectify_(rectify) {
  const bool zero = config.zero_init_flow_heads;
  const auto& hidden = config.afe_hidden_dims;
  if (attention) {
    afe_c_ = std::make_unique<FlowEstimator>(feature_channels, hidden, zero, rng);
    afe_h_ = std::make_unique<FlowEstimator>(feature_channels, hidden, zero, rng);
    afe_fuse_ = std::make_unique<FlowEstimator>(3 * feature_channels, hidden, zero, rng);
    register_module("afe_c", *afe_c_);
    register_module("afe_h", *afe_h_);
    register_module("afe_fuse", *afe_fuse_);
    if (rectify) {
      frw_c_ = std::make_unique<FlowRectifier>(feature_channels, config.frw_hidden_dim, config.channel_reduction,
                                               zero, rng);
      frw_h_ = std::make_unique<FlowRectifier>(feature_channels, config.frw_hidden_dim, config.channel_reduction,
                                               zero, rng);
      register_module("frw_c", *frw_c_);
      register_module("frw_h", *frw_h_);
    }
  } else {
    afe_fuse_ = std::make_unique<FlowEstimator>(2 * feature_channels, hidden, zero, rng);
    register_module("afe_fuse", *afe_fuse_);
    if (rectify) {
      frw_ = std::make_unique<FlowRectifier>(feature_channels, config.frw_hidden_dim, config.channel_reduction, zero,
                                             rng);
      register_module("frw", *frw_);
    }
  }
}

WarpResult WarpBlock::operator()(const Var& f_c, const Var& f_h, const Var& prior) const {
  if (f_c.shape() != f_h.shape()) {
    throw ShapeError("cloth features " + nn::shape_string(f_c.shape()) + " and human features " +
                     nn::shape_string(f_h.shape()) + " differ");
  }
  Var prior_up;
  if (prior.defined()) {
    prior_up = upsample_prior_flow(prior);
    if (prior_up.value().height() != f_c.value().height() || prior_up.value().width() != f_c.value().width()) {
      throw ShapeError("prior flow " + nn::shape_string(prior.shape()) + " does not match features " +
                       nn::shape_string(f_c.shape()) + " after x2 upsampling");
    }
  }
  auto with_prior = [&](const Var& flow) { return prior_up.defined() ? nn::add(prior_up, flow) : flow; };

  Var fused;
  if (attention_) {
    Var flow_c = with_prior((*afe_c_)(f_c));
    Var flow_h = with_prior((*afe_h_)(f_h));
    Var r_c = flow_c;
    Var r_h = flow_h;
    if (rectify_) {
      r_c = (*frw_c_)(nn::warp(f_c, flow_c), flow_c);
      r_h = (*frw_h_)(f_h, flow_h);
    }
    fused = with_prior((*afe_fuse_)(nn::concat_channels({nn::warp(f_c, r_c), nn::warp(f_c, r_h), f_h})));
  } else {
    fused = with_prior((*afe_fuse_)(nn::concat_channels({f_c, f_h})));
    if (rectify_) fused = (*frw_)(nn::warp(f_c, fused), fused);
  }
  return {fused, nn::warp(f_c, fused)};
}

void WarpBlock::zero_flow_heads() {
  for (FlowEstimator* e : {afe_c_.get(), afe_h_.get(), afe_fuse_.get()}) {
    if (e) e->head().zero();
  }
  for (FlowRectifier* r : {frw_c_.get(), frw_h_.get(), frw_.get()}) {
    if (r) r->delta().zero();
  }
}

void WarpBlock::randomize_flow_heads(Rng& rng, double scale) {
  // Estimators start at a half-pixel shift; after x2 upsampling of the prior
  // every composed flow stays near k + 0.5, away from the integer kinks of
  // bilinear sampling.
  for (FlowEstimator* e : {afe_c_.get(), afe_h_.get(), afe_fuse_.get()}) {
    if (e) redraw(e->head(), rng, scale, 0.5);
  }
  for (FlowRectifier* r : {frw_c_.get(), frw_h_.get(), frw_.get()}) {
    if (r) redraw(r->delta(), rng, scale, 0.0);
  }
}

// --- generator ---------------------------------------------------------------

Generator::Generator(const ModelConfig& config, Rng& rng) {
  const auto& g = config.gen_hidden_dims;
  int prev = 3;
  for (int d : g) {
    encoder_layers_.push_back(conv3(prev, d, rng));
    prev = d;
  }
  for (std::size_t i = 0; i < encoder_layers_.size(); ++i) {
    encoder_.add("conv" + std::to_string(i + 1), *encoder_layers_[i]);
  }
  const int latent = g.back();
  warp_ = std::make_unique<WarpBlock>(latent, config, config.flags.afew, config.flags.frw_gen, rng);
  prev = 2 * latent;
  for (auto it = g.rbegin(); it != g.rend(); ++it) {
    decoder_layers_.push_back(conv3(prev, *it, rng));
    prev = *it;
  }
  decoder_layers_.push_back(conv3(prev, 3, rng));
  register_module("encoder", encoder_);
  register_module("warp", *warp_);
  for (std::size_t i = 0; i < decoder_layers_.size(); ++i) {
    register_module("decoder" + std::to_string(i + 1), *decoder_layers_[i]);
  }
}

Var Generator::encode(const Var& image) const {
  Var h = image;
  for (const auto& conv : encoder_layers_) h = leaky_relu((*conv)(h));
  return h;
}

Var Generator::operator()(const Var& cloth, const Var& agnostic, const Var& finest_flow) const {
  if (!finest_flow.defined()) throw ContractError("generation needs the finest-scale fused flow");
  Var e_c = encode(cloth);
  Var e_a = encode(agnostic);
  WarpResult r = (*warp_)(e_c, e_a, finest_flow);
  Var h = nn::concat_channels({r.warped, e_a});
  for (std::size_t i = 0; i + 1 < decoder_layers_.size(); ++i) h = leaky_relu((*decoder_layers_[i])(h));
  return nn::tanh((*decoder_layers_.back())(h));
}

// --- network -----------------------------------------------------------------

TryOnNet::TryOnNet(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.init_seed);
  cloth_fpn_ = std::make_unique<FeaturePyramidNet>(3, config_.fpn_dims, config_.fpn_out_dim, rng);
  human_fpn_ = std::make_unique<FeaturePyramidNet>(config_.pose_channels + 3, config_.fpn_dims, config_.fpn_out_dim,
                                                   rng);
  for (int level = 1; level <= config_.num_scales; ++level) {
    warp_blocks_.push_back(
        std::make_unique<WarpBlock>(config_.fpn_out_dim, config_, config_.flags.afew, config_.flags.frw_warp, rng));
  }
  generator_ = std::make_unique<Generator>(config_, rng);
  register_module("cloth_fpn", *cloth_fpn_);
  register_module("human_fpn", *human_fpn_);
  for (int level = 1; level <= config_.num_scales; ++level) {
    register_module("warp" + std::to_string(level), *warp_blocks_[level - 1]);
  }
  register_module("generator", *generator_);
}

TryOnOutputs TryOnNet::forward(const TryOnSample& sample) const {
  sample.validate(config_);
  Var cloth = nn::constant(sample.cloth);
  Var human_in = nn::constant(nn::concat_channels(sample.pose, sample.agnostic));
  std::vector<Var> f_c = (*cloth_fpn_)(cloth);
  std::vector<Var> f_h = (*human_fpn_)(human_in);

  TryOnOutputs out;
  Var prior;
  for (int level = config_.num_scales; level >= 1; --level) {
    const auto i = static_cast<std::size_t>(level - 1);
    WarpResult r = (*warp_blocks_[i])(f_c[i], f_h[i], prior);
    Var cloth_small = nn::constant(nn::area_downsample(sample.cloth, 1 << level));
    out.fused_flows.push_back(r.flow);
    out.warped_cloth_features.push_back(r.warped);
    out.warped_cloth_images.push_back(nn::warp(cloth_small, r.flow));
    out.cloth_features.push_back(f_c[i]);
    prior = r.flow;
  }
  out.y_p = (*generator_)(cloth, nn::constant(sample.agnostic), prior);
  return out;
}

void TryOnNet::randomize_flow_heads(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& block : warp_blocks_) block->randomize_flow_heads(rng, scale);
  generator_->warp_block().randomize_flow_heads(rng, scale);
}

}  // namespace mycloth::tryon
