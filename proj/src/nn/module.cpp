#include "mycloth/nn/module.hpp"

#include <algorithm>
#include <cmath>

#include "mycloth/common/error.hpp"
#include "mycloth/nn/ops.hpp"

namespace mycloth::nn {

Var& Module::register_parameter(const std::string& name, Tensor value) {
  params_.emplace_back(name, Var(std::move(value), true));
  return params_.back().second;
}

void Module::register_module(const std::string& name, Module& child) { children_.emplace_back(name, &child); }

void Module::collect(const std::string& prefix, std::vector<std::pair<std::string, Var>>& out,
                     std::vector<const Node*>& seen) const {
  for (const auto& [name, var] : params_) {
    const Node* id = var.node().get();
    if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
    seen.push_back(id);
    out.emplace_back(prefix + name, var);
  }
  for (const auto& [name, child] : children_) child->collect(prefix + name + ".", out, seen);
}

std::vector<std::pair<std::string, Var>> Module::named_parameters() const {
  std::vector<std::pair<std::string, Var>> out;
  std::vector<const Node*> seen;
  collect("", out, seen);
  return out;
}

std::vector<Var> Module::parameters() const {
  std::vector<Var> out;
  for (auto& [name, var] : named_parameters()) out.push_back(var);
  return out;
}

std::size_t Module::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, var] : named_parameters()) n += var.value().numel();
  return n;
}

void Module::zero_grad() {
  for (auto& [name, var] : named_parameters()) var.zero_grad();
}

NamedTensors Module::state() const {
  NamedTensors out;
  for (const auto& [name, var] : named_parameters()) out.emplace(name, var.value());
  return out;
}

void Module::load_state(const NamedTensors& state) {
  auto named = named_parameters();
  for (auto& [name, var] : named) {
    auto it = state.find(name);
    if (it == state.end()) throw LoadError("missing parameter '" + name + "'");
    if (it->second.shape() != var.shape()) {
      throw LoadError("parameter '" + name + "' has shape " + shape_string(it->second.shape()) + ", expected " +
                      shape_string(var.shape()));
    }
  }
  if (state.size() != named.size()) {
    for (const auto& [name, tensor] : state) {
      bool known = std::any_of(named.begin(), named.end(), [&](const auto& p) { return p.first == name; });
      if (!known) throw LoadError("unexpected parameter '" + name + "'");
    }
  }
  for (auto& [name, var] : named) var.mutable_value() = state.at(name);
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, Rng& rng)
    : in_channels_(in_channels), out_channels_(out_channels), stride_(stride), padding_(padding) {
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0 || stride <= 0 || padding < 0) {
    throw ConfigError("invalid conv2d configuration");
  }
  const int fan_in = in_channels * kernel * kernel;
  const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
  const double bound = gain * std::sqrt(3.0 / fan_in);
  Tensor w({out_channels, in_channels, kernel, kernel});
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.uniform(-bound, bound);
  weight_ = register_parameter("weight", std::move(w));
  bias_ = register_parameter("bias", Tensor({out_channels}));
}

Var Conv2d::operator()(const Var& x) const { return conv2d(x, weight_, bias_, stride_, padding_); }

void Conv2d::zero() {
  weight_.mutable_value().fill(0);
  bias_.mutable_value().fill(0);
}

}  // namespace mycloth::nn
