#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/adam.hpp"
#include "mycloth/tryon/checkpoint.hpp"
#include "mycloth/tryon/convert.hpp"
#include "mycloth/tryon/loss.hpp"
#include "mycloth/tryon/network.hpp"
#include "mycloth/tryon/predictor.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace mycloth;
using namespace mycloth::tryon;
using mycloth::testing::random_tensor;

namespace {

// Five scales with every width at 4: the shape walk of the full model at a
// fraction of the cost.
ModelConfig slim_config() {
  ModelConfig c;
  c.fpn_dims = {4, 4, 4, 4, 4};
  c.fpn_out_dim = 4;
  c.afe_hidden_dims = {4, 4, 4, 4};
  c.gen_hidden_dims = {4, 4, 4};
  c.frw_hidden_dim = 4;
  c.channel_reduction = 2;
  c.pose_channels = 3;
  c.init_seed = 5;
  return c;
}

TryOnSample random_sample(int h, int w, int pose_channels, std::uint64_t seed, bool with_gt = true) {
  nn::Rng rng(seed);
  TryOnSample s;
  s.cloth = random_tensor({3, h, w}, rng);
  s.person = random_tensor({3, h, w}, rng);
  s.pose = random_tensor({pose_channels, h, w}, rng, 0.0, 1.0);
  s.agnostic = random_tensor({3, h, w}, rng);
  if (with_gt) s.ground_truth = random_tensor({3, h, w}, rng);
  return s;
}

double max_abs(const Tensor& t) {
  double m = 0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

double mean_abs_oracle(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.numel());
}

class FourTaps final : public FeatureExtractor {
 public:
  std::vector<Var> taps(const Var& image) const override { return {image, image, image, image}; }
  std::string name() const override { return "four"; }
};

}  // namespace

TEST_CASE("pyramid levels halve from 256x192") {
  nn::Rng rng(1);
  FeaturePyramidNet fpn(3, {4, 4, 4, 4, 4}, 6, rng);
  auto levels = fpn(nn::constant(Tensor({3, 256, 192}, 0.1)));
  REQUIRE(levels.size() == 5);
  const std::vector<std::pair<int, int>> dims{{128, 96}, {64, 48}, {32, 24}, {16, 12}, {8, 6}};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(levels[i].shape() == nn::Shape{6, dims[i].first, dims[i].second});
  }
}

TEST_CASE("indivisible input is a shape error") {
  nn::Rng rng(1);
  FeaturePyramidNet fpn(3, {4, 4, 4, 4, 4}, 4, rng);
  CHECK_THROWS_AS(fpn(nn::constant(Tensor({3, 64, 48}))), ShapeError);
  TryOnNet net(slim_config());
  CHECK_THROWS_AS(net.forward(random_sample(64, 48, 3, 1)), ShapeError);
  CHECK_THROWS_AS(fpn(nn::constant(Tensor({4, 64, 64}))), ShapeError);
}

TEST_CASE("cloth and human branches do not share parameters") {
  ModelConfig c = slim_config();
  c.pose_channels = 0;  // both branches then take 3 channels
  TryOnNet net(c);
  nn::Rng rng(3);
  Var x = nn::constant(random_tensor({3, 32, 32}, rng));
  auto a = net.cloth_fpn()(x);
  auto b = net.human_fpn()(x);
  CHECK(nn::max_abs_diff(a[0].value(), b[0].value()) > 1e-6);
  std::set<const nn::Node*> cloth_nodes;
  for (const Var& p : net.cloth_fpn().parameters()) cloth_nodes.insert(p.node().get());
  for (const Var& p : net.human_fpn().parameters()) CHECK(cloth_nodes.count(p.node().get()) == 0);
}

TEST_CASE("flow estimator shape, zero head and finiteness") {
  nn::Rng rng(2);
  FlowEstimator zero(64, {8, 8, 8, 8}, true, rng);
  Var f = nn::constant(random_tensor({64, 8, 6}, rng));
  Var flow = zero(f);
  CHECK(flow.shape() == nn::Shape{2, 8, 6});
  CHECK(max_abs(flow.value()) == 0.0);
  CHECK(zero.hidden_widths() == std::vector<int>{8, 8, 8, 8});

  FlowEstimator random(64, {8, 8, 8, 8}, false, rng);
  for (int trial = 0; trial < 5; ++trial) {
    Var out = random(nn::constant(random_tensor({64, 8, 6}, rng, -10.0, 10.0)));
    CHECK(out.value().all_finite());
    CHECK(max_abs(out.value()) > 0);
  }
}

TEST_CASE("rectifier is the identity at init and keeps flow dims") {
  nn::Rng rng(3);
  FlowRectifier frw(4, 4, 2, true, rng);
  for (auto [h, w] : {std::pair{128, 96}, {32, 24}, {8, 6}}) {
    Var feature = nn::constant(random_tensor({4, h, w}, rng));
    Var flow = nn::constant(random_tensor({2, h, w}, rng, -2.0, 2.0));
    Var out = frw(feature, flow);
    CHECK(out.shape() == flow.shape());
    CHECK(out.value() == flow.value());
  }
  CHECK_THROWS_AS(frw(nn::constant(Tensor({4, 8, 6})), nn::constant(Tensor({2, 8, 8}))), ShapeError);
}

TEST_CASE("rectifier gradients reach feature and flow after one step") {
  nn::Rng rng(4);
  FlowRectifier frw(4, 4, 2, true, rng);
  Var feature(random_tensor({4, 8, 8}, rng), true);
  Var flow(random_tensor({2, 8, 8}, rng), true);
  Var target = nn::constant(Tensor({2, 8, 8}, 3.0));
  auto loss = [&] { return nn::mean_abs_diff(frw(feature, flow), target); };

  nn::backward(loss());
  CHECK(max_abs(flow.grad()) > 0);
  CHECK(max_abs(frw.delta().weight().grad()) > 0);

  nn::AdamOptions o;
  o.lr = 1e-2;
  nn::Adam adam(frw.named_parameters(), o);
  adam.step();
  adam.zero_grad();
  feature.zero_grad();
  flow.zero_grad();
  nn::backward(loss());
  CHECK(max_abs(feature.grad()) > 0);
  CHECK(max_abs(flow.grad()) > 0);
}

TEST_CASE("warp block at the coarsest scale is the identity at init") {
  nn::Rng rng(5);
  const ModelConfig c = slim_config();
  for (bool attention : {true, false}) {
    WarpBlock block(4, c, attention, true, rng);
    Var f_c = nn::constant(random_tensor({4, 8, 6}, rng));
    Var f_h = nn::constant(random_tensor({4, 8, 6}, rng));
    WarpResult r = block(f_c, f_h, Var());
    CHECK(max_abs(r.flow.value()) == 0.0);
    CHECK(r.warped.value() == f_c.value());
  }
}

TEST_CASE("prior flow upsamples x2 with doubled displacements") {
  Tensor prior({2, 8, 6});
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 6; ++x) {
      prior.at(0, y, x) = 0.75;
      prior.at(1, y, x) = -1.25;
    }
  Var up = upsample_prior_flow(nn::constant(prior));
  REQUIRE(up.shape() == nn::Shape{2, 16, 12});
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 12; ++x) {
      CHECK(up.value().at(0, y, x) == doctest::Approx(1.5));
      CHECK(up.value().at(1, y, x) == doctest::Approx(-2.5));
    }
  // a ramp doubles too
  Tensor ramp({2, 2, 2}, std::vector<Real>{0, 1, 0, 1, 0, 0, 0, 0});
  Tensor bilinear = nn::upsample2x_bilinear(ramp);
  Var r = upsample_prior_flow(nn::constant(ramp));
  for (std::size_t i = 0; i < bilinear.numel(); ++i) CHECK(r.value()[i] == doctest::Approx(2 * bilinear[i]));
}

TEST_CASE("forward on 256x192: output shapes and coarse-to-fine cascade") {
  TryOnNet net(slim_config());
  nn::NoGradGuard guard;
  TryOnOutputs out = net.forward(random_sample(256, 192, 3, 6));
  CHECK(out.y_p.shape() == nn::Shape{3, 256, 192});
  REQUIRE(out.fused_flows.size() == 5);
  REQUIRE(out.warped_cloth_images.size() == 5);
  REQUIRE(out.warped_cloth_features.size() == 5);
  const std::vector<std::pair<int, int>> dims{{8, 6}, {16, 12}, {32, 24}, {64, 48}, {128, 96}};
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(out.fused_flows[k].shape() == nn::Shape{2, dims[k].first, dims[k].second});
    CHECK(out.warped_cloth_images[k].shape() == nn::Shape{3, dims[k].first, dims[k].second});
  }
}

TEST_CASE("initialization identity: zero flows, warped features equal the cloth pyramid") {
  TryOnNet net(slim_config());
  nn::NoGradGuard guard;
  TryOnSample s = random_sample(64, 64, 3, 7);
  TryOnOutputs out = net.forward(s);
  auto pyramid = net.cloth_fpn()(nn::constant(s.cloth));
  for (std::size_t k = 0; k < 5; ++k) {
    CAPTURE(k);
    CHECK(max_abs(out.fused_flows[k].value()) == 0.0);
    CHECK(out.warped_cloth_features[k].value() == out.cloth_features[k].value());
    CHECK(out.cloth_features[k].value() == pyramid[4 - k].value());
    CHECK(out.warped_cloth_images[k].value() == nn::area_downsample(s.cloth, 1 << (5 - k)));
  }
}

TEST_CASE("forward is deterministic and scales with resolution") {
  TryOnNet net(slim_config());
  net.randomize_flow_heads(9, 0.05);
  nn::NoGradGuard guard;
  TryOnSample s = random_sample(64, 64, 3, 8);
  TryOnOutputs a = net.forward(s);
  TryOnOutputs b = net.forward(s);
  CHECK(a.y_p.value() == b.y_p.value());
  for (std::size_t k = 0; k < 5; ++k) CHECK(a.fused_flows[k].value() == b.fused_flows[k].value());

  TryOnOutputs big = net.forward(random_sample(512, 384, 3, 8, false));
  CHECK(big.y_p.shape() == nn::Shape{3, 512, 384});
  CHECK(big.fused_flows.back().shape() == nn::Shape{2, 256, 192});
  CHECK(big.fused_flows.front().shape() == nn::Shape{2, 16, 12});
}

TEST_CASE("same net from the same seed, different nets from different seeds") {
  ModelConfig c = slim_config();
  TryOnNet a(c), b(c);
  CHECK(a.state() == b.state());
  c.init_seed = 6;
  TryOnNet d(c);
  CHECK(a.state() != d.state());
}

TEST_CASE("generator: shape, range, shared encoder, contract") {
  ModelConfig c = slim_config();
  c.gen_hidden_dims = {5, 6, 7};
  TryOnNet net(c);
  net.randomize_flow_heads(3, 0.5);
  const Generator& g = net.generator();
  REQUIRE(g.encoder_layers().size() == 3);
  CHECK(g.encoder_layers()[0]->out_channels() == 5);
  CHECK(g.encoder_layers()[2]->out_channels() == 7);

  // one parameter set behind both encodings
  auto enc = g.encoder().parameters();
  REQUIRE(enc.size() == 6);
  CHECK(enc[0] == g.encoder_layers()[0]->weight());
  std::size_t encoder_entries = 0;
  for (const auto& [name, p] : net.named_parameters()) {
    if (name.rfind("generator.encoder.", 0) == 0) ++encoder_entries;
  }
  CHECK(encoder_entries == 6);
  nn::Rng rng(10);
  Var x = nn::constant(random_tensor({3, 32, 32}, rng));
  CHECK(g.encode(x).value() == g.encode(x).value());

  nn::NoGradGuard guard;
  for (int trial = 0; trial < 3; ++trial) {
    TryOnSample s = random_sample(64, 32, 3, 20 + trial, false);
    Var y = net.forward(s).y_p;
    CHECK(y.shape() == nn::Shape{3, 64, 32});
    CHECK(max_abs(y.value()) <= 1.0);
  }
  CHECK_THROWS_AS(g(x, x, Var()), ContractError);
}

TEST_CASE("similarity loss") {
  nn::Rng rng(11);
  Tensor a = random_tensor({3, 8, 8}, rng);
  Tensor shifted = a;
  for (auto& v : shifted.values()) v += 0.5;
  CHECK(nn::scalar_value(loss_similarity(nn::constant(a), nn::constant(a))) == 0.0);
  CHECK(nn::scalar_value(loss_similarity(nn::constant(shifted), nn::constant(a))) == doctest::Approx(0.5));
  Tensor b = random_tensor({3, 8, 8}, rng);
  CHECK(std::abs(nn::scalar_value(loss_similarity(nn::constant(a), nn::constant(b))) - mean_abs_oracle(a, b)) < 1e-7);
  CHECK_THROWS_AS(loss_similarity(nn::constant(a), nn::constant(Tensor({3, 8, 4}))), ShapeError);
}

TEST_CASE("perceptual loss") {
  nn::Rng rng(12);
  Var a = nn::constant(random_tensor({3, 16, 16}, rng));
  Var b = nn::constant(random_tensor({3, 16, 16}, rng));
  RandomConvExtractor random(7);
  IdentityExtractor identity;
  CHECK(nn::scalar_value(loss_perceptual(a, a, random)) == 0.0);
  CHECK(nn::scalar_value(loss_perceptual(a, b, identity)) ==
        doctest::Approx(5 * nn::scalar_value(loss_similarity(a, b))).epsilon(1e-12));
  auto ta = random.taps(a);
  auto tb = random.taps(b);
  REQUIRE(ta.size() == 5);
  double oracle = 0;
  for (int i = 0; i < 5; ++i) oracle += mean_abs_oracle(ta[i].value(), tb[i].value());
  CHECK(std::abs(nn::scalar_value(loss_perceptual(a, b, random)) - oracle) < 1e-6);
  CHECK_THROWS_AS(loss_perceptual(a, b, FourTaps()), ContractError);

  Vgg19Extractor vgg;
  auto taps = vgg.taps(nn::constant(random_tensor({3, 8, 8}, rng)));
  CHECK(taps.size() == 5);
  CHECK_FALSE(vgg.pretrained());
}

TEST_CASE("scale weighting") {
  auto s = [](double v) { return nn::constant(Tensor({1}, v)); };
  CHECK(nn::scalar_value(weighted_scale_sum({{s(0.3), s(0.7)}}, 1, 1)) == doctest::Approx(2 * (0.3 + 0.7)));
  CHECK(nn::scalar_value(weighted_scale_sum({{s(1), s(0)}, {s(1), s(0)}, {s(1), s(0)}}, 1, 1)) == 9.0);
  // general constants: sum (n + 1) c_n
  std::vector<ScaleLoss> terms;
  double expected = 0;
  for (int n = 1; n <= 5; ++n) {
    terms.push_back({s(0.1 * n), s(0.01 * n)});
    expected += (n + 1) * (2.0 * 0.1 * n + 3.0 * 0.01 * n);
  }
  CHECK(nn::scalar_value(weighted_scale_sum(terms, 2.0, 3.0)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("total loss is zero when every prediction hits its target") {
  const ModelConfig c = slim_config();
  TryOnSample s = random_sample(64, 64, 3, 13);
  TryOnOutputs out;
  out.y_p = nn::constant(*s.ground_truth);
  for (int k = 0; k < 5; ++k) {
    out.fused_flows.push_back(nn::constant(Tensor({2, 2, 2})));
    out.warped_cloth_images.push_back(nn::constant(nn::area_downsample(*s.ground_truth, 1 << (5 - k))));
  }
  RandomConvExtractor ex(1);
  LossBreakdown l = loss_total(out, s, c, ex);
  CHECK(nn::scalar_value(l.total) == 0.0);
  CHECK(l.similarity.size() == 5);

  out.warped_cloth_images.pop_back();
  CHECK_THROWS_AS(loss_total(out, s, c, ex), ContractError);
  TryOnSample no_gt = s;
  no_gt.ground_truth.reset();
  out.warped_cloth_images.push_back(out.warped_cloth_images.back());
  CHECK_THROWS_AS(loss_total(out, no_gt, c, ex), ValidationError);
}

TEST_CASE("total loss of a forward pass matches the per-scale oracle") {
  ModelConfig c = slim_config();
  c.num_scales = 2;
  c.fpn_dims = {4, 4};
  TryOnNet net(c);
  net.randomize_flow_heads(4, 0.1);
  TryOnSample s = random_sample(32, 32, 3, 14);
  Tensor mask({1, 32, 32}, 0.0);
  for (int y = 8; y < 24; ++y)
    for (int x = 4; x < 28; ++x) mask.at(0, y, x) = 1.0;
  s.garment_mask = mask;
  TryOnOutputs out = net.forward(s);
  IdentityExtractor ex;
  LossBreakdown l = loss_total(out, s, c, ex);

  // n = 1 uses level 1 (16x16), n = 2 uses y_p
  Tensor m = nn::area_downsample(mask, 2);
  Tensor pred = out.warped_cloth_images[1].value();
  Tensor target = nn::area_downsample(*s.ground_truth, 2);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        pred.at(ch, y, x) *= m.at(0, y, x);
        target.at(ch, y, x) *= m.at(0, y, x);
      }
  const double ls1 = mean_abs_oracle(pred, target);
  const double ls2 = mean_abs_oracle(out.y_p.value(), *s.ground_truth);
  CHECK(l.similarity[0] == doctest::Approx(ls1).epsilon(1e-12));
  CHECK(l.similarity[1] == doctest::Approx(ls2).epsilon(1e-12));
  CHECK(nn::scalar_value(l.total) == doctest::Approx(2 * 6 * ls1 + 3 * 6 * ls2).epsilon(1e-12));
}

TEST_CASE("default model fingerprints") {
  const ModelConfig c;
  TryOnNet net(c);
  for (int level = 1; level <= c.num_scales; ++level) {
    const WarpBlock& b = net.warp_block(level);
    CHECK(b.fuse_estimator().hidden_widths() == std::vector<int>{512, 256, 128, 64});
    REQUIRE(b.cloth_estimator() != nullptr);
    CHECK(b.cloth_estimator()->hidden_widths() == std::vector<int>{512, 256, 128, 64});
    CHECK(b.human_estimator()->hidden_widths() == std::vector<int>{512, 256, 128, 64});
    CHECK(b.fuse_estimator().hidden().size() == 4);
  }
  std::vector<int> enc, dec;
  for (const auto& l : net.generator().encoder_layers()) enc.push_back(l->out_channels());
  for (const auto& l : net.generator().decoder_layers()) dec.push_back(l->out_channels());
  CHECK(enc == std::vector<int>{32, 64, 128});
  CHECK(dec == std::vector<int>{128, 64, 32, 3});
  CHECK(net.cloth_fpn().num_levels() == 5);
  CHECK(net.cloth_fpn().in_channels() == 3);
  CHECK(net.human_fpn().in_channels() == 18 + 3);
}

TEST_CASE("ablation flags swap modules for pass-through substitutes") {
  ModelConfig c = slim_config();
  c.flags = {false, false, false};
  TryOnNet base(c);
  CHECK(base.warp_block(1).cloth_estimator() == nullptr);
  CHECK_FALSE(base.warp_block(1).rectify());
  c.flags = {true, true, true};
  TryOnNet full(c);
  CHECK(full.parameter_count() > base.parameter_count());
}

TEST_CASE("model config JSON and validation") {
  ModelConfig c = slim_config();
  c.flags.frw_gen = false;
  c.lambda_per = 0.5;
  CHECK(model_config_from_json(to_json(c)) == c);
  CHECK(model_config_from_json(nlohmann::json::object()) == ModelConfig{});
  CHECK_THROWS_AS(model_config_from_json({{"num_scale", 5}}), ConfigError);
  CHECK_THROWS_AS(model_config_from_json({{"num_scales", "five"}}), ConfigError);

  ModelConfig bad = c;
  bad.afe_hidden_dims = {8, 8, 8};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.lambda_s = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.fpn_dims = {4, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.share_branch_params = true;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(TryOnNet{bad}, ConfigError);
}

TEST_CASE("sample validation") {
  const ModelConfig c = slim_config();
  TryOnSample s = random_sample(64, 64, 3, 15);
  CHECK_NOTHROW(s.validate(c));
  TryOnSample t = s;
  t.person.at(0, 0, 0) = 1.5;
  CHECK_THROWS_AS(t.validate(c), ValidationError);
  t = s;
  t.pose = Tensor({2, 64, 64});
  CHECK_THROWS_AS(t.validate(c), ShapeError);
  t = s;
  t.agnostic = Tensor({3, 64, 32});
  CHECK_THROWS_AS(t.validate(c), ShapeError);
  t = s;
  t.garment_mask = Tensor({1, 64, 64}, 0.5);
  CHECK_THROWS_AS(t.validate(c), ValidationError);
  t = s;
  t.cloth.at(1, 2, 3) = std::nan("");
  CHECK_THROWS_AS(t.validate(c), ValidationError);
}

TEST_CASE("pixel conversion") {
  CHECK(pixel_to_real(0) == -1.0);
  CHECK(pixel_to_real(255) == 1.0);
  for (int v = 0; v < 256; ++v) CHECK(real_to_pixel(pixel_to_real(static_cast<std::uint8_t>(v))) == v);
  CHECK(real_to_pixel(3.0) == 255);
  CHECK(real_to_pixel(-3.0) == 0);
}

TEST_CASE("checkpoint round trip") {
  mycloth::testing::TempDir dir;
  ModelConfig c = slim_config();
  c.num_scales = 2;
  c.fpn_dims = {4, 4};
  auto net = std::make_shared<TryOnNet>(c);
  net->randomize_flow_heads(2, 0.1);
  nn::Adam adam(net->named_parameters(), {});
  TrainState state{3, 42, 7, std::nullopt};
  save_checkpoint(dir.path() / "ck", *net, state, &adam);

  LoadedCheckpoint loaded = load_checkpoint(dir.path() / "ck");
  CHECK(loaded.net->config() == c);
  CHECK(loaded.net->state() == net->state());
  CHECK(loaded.state.epoch == 3);
  CHECK(loaded.state.step == 42);
  CHECK(loaded.state.optimizer_file == std::optional<std::string>("optimizer"));
  CHECK(loaded.id.size() == 16);
  nn::Adam restored(loaded.net->named_parameters(), {});
  load_optimizer_state(dir.path() / "ck", loaded.state, restored);
  CHECK(restored.state() == adam.state());

  TryOnSample s = random_sample(32, 32, 3, 16, false);
  auto predictor = load_predictor((dir.path() / "ck").string());
  CHECK(predictor->id() == loaded.id);
  nn::NoGradGuard guard;
  CHECK(predictor->predict(s) == net->forward(s).y_p.value());

  std::filesystem::remove(dir.path() / "ck" / "weights");
  try {
    load_checkpoint(dir.path() / "ck");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("weights") != std::string::npos);
  }
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "nowhere"), LoadError);
}

TEST_CASE("identity and oracle predictors") {
  nn::Rng rng(17);
  TryOnSample s = random_sample(32, 32, 3, 18);
  const Real fill = pixel_to_real(kAgnosticFill);
  for (int y = 10; y < 20; ++y)
    for (int x = 5; x < 25; ++x)
      for (int ch = 0; ch < 3; ++ch) s.agnostic.at(ch, y, x) = fill;
  s.agnostic.at(0, 0, 0) = fill;  // gray in one channel only stays
  Tensor out = load_predictor("identity")->predict(s);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const bool inside = y >= 10 && y < 20 && x >= 5 && x < 25;
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(out.at(ch, y, x) == (inside ? s.cloth.at(ch, y, x) : s.agnostic.at(ch, y, x)));
      }
    }
  CHECK(load_predictor("oracle")->predict(s) == *s.ground_truth);
  s.ground_truth.reset();
  CHECK_THROWS_AS(OracleCheckpoint().predict(s), ValidationError);
}
