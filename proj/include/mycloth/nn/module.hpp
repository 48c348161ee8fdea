#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mycloth/nn/autograd.hpp"

namespace mycloth::nn {

// Seeded generator with a fixed, library-independent mapping to reals, so
// weights are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

using NamedTensors = std::map<std::string, Tensor>;

// Parameter container. Children are registered by pointer and must be owned
// by the registering module; modules are neither copyable nor movable so
// those pointers stay valid.
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  // Dotted names, depth first in registration order. A module registered
  // under two names (shared weights) appears once, under the first.
  std::vector<std::pair<std::string, Var>> named_parameters() const;
  std::vector<Var> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  NamedTensors state() const;
  // Every parameter must be present with a matching shape; extra entries are
  // rejected as well.
  void load_state(const NamedTensors& state);

 protected:
  Var& register_parameter(const std::string& name, Tensor value);
  void register_module(const std::string& name, Module& child);

 private:
  void collect(const std::string& prefix, std::vector<std::pair<std::string, Var>>& out,
               std::vector<const Node*>& seen) const;

  std::vector<std::pair<std::string, Var>> params_;
  std::vector<std::pair<std::string, Module*>> children_;
};

class Conv2d : public Module {
 public:
  // He-uniform weights for a leaky ReLU of slope 0.2, zero bias.
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, Rng& rng);

  Var operator()(const Var& x) const;

  // Zeroes weights and bias (used for flow heads that should start at identity).
  void zero();

  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }
  const Var& weight() const { return weight_; }
  const Var& bias() const { return bias_; }

 private:
  int in_channels_;
  int out_channels_;
  int stride_;
  int padding_;
  Var weight_;
  Var bias_;
};

}  // namespace mycloth::nn
