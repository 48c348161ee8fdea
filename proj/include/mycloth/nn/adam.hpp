#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mycloth/nn/module.hpp"

namespace mycloth::nn {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Var>> params, AdamOptions options);

  // Parameters without an accumulated gradient are skipped.
  void step();
  void zero_grad();

  void set_lr(double lr) { options_.lr = lr; }
  double lr() const { return options_.lr; }
  long long steps() const { return step_; }

  NamedTensors state() const;
  void load_state(const NamedTensors& state);

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  AdamOptions options_;
  long long step_ = 0;
};

}  // namespace mycloth::nn
