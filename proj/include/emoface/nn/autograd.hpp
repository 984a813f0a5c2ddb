#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "emoface/nn/tensor.hpp"

namespace emoface::nn {

/// One vertex of the reverse-mode tape. Leaves that require gradients are
/// parameters; interior nodes carry a backward closure that scatters their
/// gradient into their parents.
struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;

  Tensor& grad_buffer();
};

/// Shared handle to a tape node. Copying a Var aliases the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() { return node_->grad_buffer(); }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(int i) const { return node_->value.dim(i); }
  float item() const { return node_->value[0]; }
  void zero_grad() { node_->grad = Tensor(); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Constant (no gradient) input.
Var constant(Tensor value);
/// Trainable leaf.
Var parameter(Tensor value);
/// Same value, cut from the tape.
Var detach(const Var& v);

/// True while gradient recording is enabled on this thread.
bool grad_enabled();

/// Disables tape recording for the current thread within its scope.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Builds an op node. `backward` is only attached when recording is enabled
/// and at least one parent requires a gradient.
Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

/// Reverse sweep from a scalar (numel == 1) root, seeding d(root)=1.
void backward(const Var& root);

}  // namespace emoface::nn
