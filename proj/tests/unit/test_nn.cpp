#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/adam.hpp"
#include "mycloth/nn/archive.hpp"
#include "mycloth/nn/module.hpp"
#include "mycloth/nn/ops.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace mycloth;
using namespace mycloth::nn;
using mycloth::testing::bilinear_ref;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Contracts op output with fixed random weights. The constant offset keeps
// |y - c| on one side of its kink, so the L1 mean is linear in y; it is kept
// small since it sets the roundoff floor of the differences.
Var probe(const Var& y, const Tensor& weights) {
  Var weighted = mul(y, constant(weights));
  return mean_abs_diff(weighted, constant(Tensor(y.shape(), -4.0)));
}

// Max relative error of tape gradients against central differences, over
// every element of every input.
double fd_error(std::vector<Var> inputs, const std::function<Var(const std::vector<Var>&)>& op,
                std::uint64_t seed = 3) {
  Rng rng(seed);
  Var first = op(inputs);
  const Tensor weights = random_tensor(first.shape(), rng);
  for (std::size_t i = 0; i < weights.numel(); ++i) REQUIRE(std::abs(first.value()[i] * weights[i]) < 3.5);
  for (auto& v : inputs) v.zero_grad();
  backward(probe(op(inputs), weights));
  NoGradGuard guard;
  double worst = 0;
  const double h = 1e-5;
  for (auto& v : inputs) {
    const Tensor analytic = v.grad();
    for (std::size_t i = 0; i < v.value().numel(); ++i) {
      const Real orig = v.value()[i];
      v.mutable_value()[i] = orig + h;
      const Real up = scalar_value(probe(op(inputs), weights));
      v.mutable_value()[i] = orig - h;
      const Real down = scalar_value(probe(op(inputs), weights));
      v.mutable_value()[i] = orig;
      const double numeric = (up - down) / (2 * h);
      const double diff = std::abs(numeric - analytic[i]);
      worst = std::max(worst, diff / std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4}));
    }
  }
  return worst;
}

Var leaf(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Var(random_tensor(std::move(shape), rng, lo, hi), true);
}

Tensor naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int o = w.dim(0), c = w.dim(1), k = w.dim(2);
  const int ho = (x.height() + 2 * pad - k) / stride + 1;
  const int wo = (x.width() + 2 * pad - k) / stride + 1;
  Tensor out({o, ho, wo});
  for (int oc = 0; oc < o; ++oc)
    for (int y = 0; y < ho; ++y)
      for (int xx = 0; xx < wo; ++xx) {
        double s = b[oc];
        for (int ic = 0; ic < c; ++ic)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              int iy = y * stride + ky - pad, ix = xx * stride + kx - pad;
              if (iy < 0 || ix < 0 || iy >= x.height() || ix >= x.width()) continue;
              s += x.at(ic, iy, ix) * w[((static_cast<std::size_t>(oc) * c + ic) * k + ky) * k + kx];
            }
        out.at(oc, y, xx) = s;
      }
  return out;
}

class TwoLayer : public Module {
 public:
  explicit TwoLayer(Rng& rng) : a(2, 3, 3, 1, 1, rng), b(3, 1, 1, 1, 0, rng) {
    register_module("a", a);
    register_module("b", b);
    register_module("alias", a);
  }
  Conv2d a;
  Conv2d b;
};

}  // namespace

TEST_CASE("elementwise ops match central differences, with broadcasting") {
  Rng rng(1);
  auto a = leaf({2, 3, 4}, rng);
  auto b = leaf({1, 3, 1}, rng);
  CHECK(fd_error({a, b}, [](auto& v) { return add(v[0], v[1]); }) < 1e-6);
  CHECK(fd_error({a, b}, [](auto& v) { return sub(v[0], v[1]); }) < 1e-6);
  CHECK(fd_error({a, b}, [](auto& v) { return mul(v[0], v[1]); }) < 1e-6);
  CHECK(fd_error({a}, [](auto& v) { return scale(v[0], -2.5); }) < 1e-6);
  // rank 1 pads on the left, so it runs along W
  auto broadcast = add(constant(Tensor({2, 3, 4}, 1.0)), constant(Tensor({4}, std::vector<Real>{1, 2, 3, 4})));
  CHECK(broadcast.value().at(1, 2, 3) == doctest::Approx(5.0));
  CHECK_THROWS_AS(add(constant(Tensor({2, 3, 4})), constant(Tensor({3}))), ShapeError);
}

TEST_CASE("activations match central differences") {
  Rng rng(2);
  // keep values off the origin where leaky relu has a kink
  Tensor t = random_tensor({2, 4, 4}, rng, 0.05, 1.0);
  for (std::size_t i = 0; i < t.numel(); i += 2) t[i] = -t[i];
  Var x(t, true);
  CHECK(fd_error({x}, [](auto& v) { return leaky_relu(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return relu(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return sigmoid(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return nn::tanh(v[0]); }) < 1e-6);
  CHECK(leaky_relu(constant(Tensor({1}, -1.0))).value()[0] == doctest::Approx(-0.2));
}

TEST_CASE("conv2d agrees with a direct loop and with central differences") {
  Rng rng(4);
  for (auto [stride, pad, k] : {std::tuple{1, 1, 3}, {2, 1, 3}, {1, 0, 1}, {2, 2, 5}}) {
    auto x = leaf({3, 7, 6}, rng);
    auto w = leaf({4, 3, k, k}, rng, -0.3, 0.3);
    auto b = leaf({4}, rng);
    Var y = conv2d(x, w, b, stride, pad);
    Tensor ref = naive_conv(x.value(), w.value(), b.value(), stride, pad);
    REQUIRE(y.shape() == ref.shape());
    CHECK(max_abs_diff(y.value(), ref) < 1e-12);
    const int s = stride, p = pad;
    CHECK(fd_error({x, w, b}, [s, p](auto& v) { return conv2d(v[0], v[1], v[2], s, p); }) < 1e-6);
  }
}

TEST_CASE("conv2d rejects mismatched channels") {
  Rng rng(5);
  CHECK_THROWS_AS(conv2d(leaf({2, 4, 4}, rng), leaf({1, 3, 3, 3}, rng), leaf({1}, rng), 1, 1), ShapeError);
}

TEST_CASE("pooling, resampling and concatenation match central differences") {
  Rng rng(6);
  auto x = leaf({3, 4, 6}, rng);
  auto y = leaf({2, 4, 6}, rng);
  CHECK(fd_error({x, y}, [](auto& v) { return concat_channels({v[0], v[1]}); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return channel_mean(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return channel_max(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return global_avg_pool(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return upsample2x_bilinear(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return upsample2x_nearest(v[0]); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return area_downsample(v[0], 2); }) < 1e-6);
  CHECK(fd_error({x}, [](auto& v) { return max_pool2(v[0]); }) < 1e-6);
}

TEST_CASE("resampling values") {
  Tensor t({1, 2, 2}, std::vector<Real>{0, 4, 8, 12});
  Tensor down = area_downsample(t, 2);
  CHECK(down[0] == doctest::Approx(6.0));
  Tensor up = upsample2x_bilinear(t);
  REQUIRE(up.shape() == Shape{1, 4, 4});
  // half-pixel centres: output (0,0) sits at input (-0.25,-0.25), clamped
  CHECK(up.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(up.at(0, 0, 1) == doctest::Approx(1.0));
  CHECK(up.at(0, 1, 1) == doctest::Approx(3.0));
  CHECK(up.at(0, 3, 3) == doctest::Approx(12.0));
  CHECK_THROWS_AS(area_downsample(Tensor({1, 3, 4}), 2), ShapeError);
}

TEST_CASE("warp with zero flow is the identity, bit for bit") {
  Rng rng(7);
  Tensor src = random_tensor({3, 9, 7}, rng);
  Var out = warp(constant(src), constant(Tensor({2, 9, 7}, 0.0)));
  CHECK(out.value() == src);
}

TEST_CASE("integer shift duplicates the border") {
  Tensor src({1, 1, 4}, std::vector<Real>{1, 2, 3, 4});
  Tensor flow({2, 1, 4}, 0.0);
  for (int x = 0; x < 4; ++x) flow.at(0, 0, x) = 2.0;
  Var out = warp(constant(src), constant(flow));
  CHECK(out.value() == Tensor({1, 1, 4}, std::vector<Real>{3, 4, 4, 4}));
}

TEST_CASE("random flow matches scalar bilinear sampling") {
  Rng rng(8);
  Tensor src = random_tensor({2, 6, 8}, rng);
  Tensor flow = random_tensor({2, 6, 8}, rng, -3.0, 3.0);
  Var out = warp(constant(src), constant(flow));
  double worst = 0;
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 8; ++x)
        worst = std::max(worst, std::abs(out.value().at(c, y, x) -
                                         bilinear_ref(src, c, x + flow.at(0, y, x), y + flow.at(1, y, x))));
  CHECK(worst < 1e-6);
}

TEST_CASE("warp gradients match central differences away from cell edges") {
  Rng rng(9);
  auto src = leaf({2, 5, 5}, rng);
  // fractional parts in (0.2, 0.8) and targets inside the image
  Tensor f({2, 5, 5});
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      f.at(0, y, x) = std::clamp(1.5 - x, -x + 0.3, 3.7 - x) + rng.uniform(-0.25, 0.25);
      f.at(1, y, x) = std::clamp(0.5, -y + 0.3, 3.7 - y) + rng.uniform(-0.25, 0.25);
    }
  Var flow(f, true);
  CHECK(fd_error({src, flow}, [](auto& v) { return warp(v[0], v[1]); }) < 1e-5);
}

TEST_CASE("warp rejects a flow of the wrong shape") {
  CHECK_THROWS_AS(warp(constant(Tensor({3, 4, 4})), constant(Tensor({2, 4, 5}))), ShapeError);
  CHECK_THROWS_AS(warp(constant(Tensor({3, 4, 4})), constant(Tensor({3, 4, 4}))), ShapeError);
}

TEST_CASE("gradients are not recorded under NoGradGuard") {
  Rng rng(10);
  auto x = leaf({1, 2, 2}, rng);
  {
    NoGradGuard guard;
    CHECK_FALSE(grad_enabled());
    CHECK_FALSE(scale(x, 2.0).requires_grad());
  }
  CHECK(grad_enabled());
  CHECK(scale(x, 2.0).requires_grad());
}

TEST_CASE("tensor archive round trip and corruption") {
  Rng rng(11);
  NamedTensors tensors{{"a.weight", random_tensor({2, 3, 1, 1}, rng)}, {"step", Tensor({1}, 7.0)},
                       {"empty", Tensor(Shape{0})}};
  auto bytes = encode_tensors(tensors);
  CHECK(decode_tensors(bytes) == tensors);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_tensors(truncated), LoadError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_tensors(bad_magic), LoadError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_tensors(trailing), LoadError);

  testing::TempDir dir;
  auto path = dir.path() / "t.myct";
  save_tensors(path, tensors);
  CHECK(load_tensors(path) == tensors);
  try {
    load_tensors(dir.path() / "missing.myct");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("missing.myct") != std::string::npos);
  }
}

TEST_CASE("module parameters, sharing and state loading") {
  Rng rng(12);
  TwoLayer m(rng);
  auto named = m.named_parameters();
  REQUIRE(named.size() == 4);
  CHECK(named[0].first == "a.weight");
  CHECK(named[3].first == "b.bias");
  CHECK(m.parameter_count() == 3 * 2 * 9 + 3 + 3 + 1);

  NamedTensors state = m.state();
  Rng other_rng(99);
  TwoLayer other(other_rng);
  other.load_state(state);
  CHECK(other.state() == state);

  NamedTensors missing = state;
  missing.erase("b.bias");
  CHECK_THROWS_AS(other.load_state(missing), LoadError);
  NamedTensors extra = state;
  extra.emplace("c.weight", Tensor({1}));
  CHECK_THROWS_AS(other.load_state(extra), LoadError);
  NamedTensors wrong = state;
  wrong["a.bias"] = Tensor({4});
  CHECK_THROWS_AS(other.load_state(wrong), LoadError);
}

TEST_CASE("Adam matches a hand-computed update") {
  Var p(Tensor({2}, std::vector<Real>{1.0, -2.0}), true);
  Var untouched(Tensor({1}, 5.0), true);
  AdamOptions o;
  o.lr = 0.1;
  Adam adam({{"p", p}, {"u", untouched}}, o);
  const std::vector<Real> g1{0.5, -1.0}, g2{-0.25, 2.0};
  std::vector<double> w{1.0, -2.0}, m{0, 0}, v{0, 0};
  for (int t = 1; t <= 2; ++t) {
    const auto& g = t == 1 ? g1 : g2;
    adam.zero_grad();
    p.node()->ensure_grad() = Tensor({2}, g);
    adam.step();
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      w[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  CHECK(p.value()[0] == doctest::Approx(w[0]).epsilon(1e-14));
  CHECK(p.value()[1] == doctest::Approx(w[1]).epsilon(1e-14));
  CHECK(untouched.value()[0] == 5.0);
  CHECK(adam.steps() == 2);

  Var q(Tensor({2}, std::vector<Real>{1.0, -2.0}), true);
  Adam restored({{"p", q}, {"u", Var(Tensor({1}, 5.0), true)}}, o);
  restored.load_state(adam.state());
  CHECK(restored.steps() == 2);
  CHECK(restored.state() == adam.state());
}
