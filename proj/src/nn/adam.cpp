#include "mycloth/nn/adam.hpp"

#include <cmath>

#include "mycloth/common/error.hpp"

namespace mycloth::nn {

Adam::Adam(std::vector<std::pair<std::string, Var>> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& [name, var] : params_) {
    m_.emplace_back(var.shape());
    v_.emplace_back(var.shape());
  }
}

void Adam::step() {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& p = params_[i].second;
    if (!p.has_grad()) continue;
    const Tensor& g = p.grad();
    Tensor& w = p.mutable_value();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < w.numel(); ++j) {
      m[j] = b1 * m[j] + (1 - b1) * g[j];
      v[j] = b2 * v[j] + (1 - b2) * g[j] * g[j];
      w[j] -= options_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& [name, var] : params_) var.zero_grad();
}

NamedTensors Adam::state() const {
  NamedTensors out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.emplace("m." + params_[i].first, m_[i]);
    out.emplace("v." + params_[i].first, v_[i]);
  }
  out.emplace("step", Tensor({1}, static_cast<Real>(step_)));
  return out;
}

void Adam::load_state(const NamedTensors& state) {
  auto get = [&](const std::string& key, const Shape& shape) -> const Tensor& {
    auto it = state.find(key);
    if (it == state.end()) throw LoadError("optimizer state is missing '" + key + "'");
    if (it->second.shape() != shape) throw LoadError("optimizer state '" + key + "' has the wrong shape");
    return it->second;
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i] = get("m." + params_[i].first, params_[i].second.shape());
    v_[i] = get("v." + params_[i].first, params_[i].second.shape());
  }
  step_ = static_cast<long long>(get("step", Shape{1})[0]);
}

}  // namespace mycloth::nn
