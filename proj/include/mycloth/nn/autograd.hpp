#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mycloth/nn/tensor.hpp"

namespace mycloth::nn {

// Reverse-mode tape node. `backward` reads this node's grad and accumulates
// into the grads of `inputs`.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Zero-filled on first use.
  Tensor& ensure_grad();
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  const std::shared_ptr<Node>& node() const { return node_; }
  bool defined() const { return node_ != nullptr; }

  void zero_grad();

  // Identity of the underlying storage; shared parameters compare equal.
  friend bool operator==(const Var& a, const Var& b) { return a.node_ == b.node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Tensor value);

// Builds an op result. When gradients are disabled or no input requires a
// gradient, the result is a detached constant and `backward` is dropped.
Var make_result(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward);

// Seeds d(root)/d(root) = 1 (root must hold one element) and propagates.
void backward(const Var& root);

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace mycloth::nn
