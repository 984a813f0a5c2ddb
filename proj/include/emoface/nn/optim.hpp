#pragma once

#include <vector>

#include "emoface/nn/autograd.hpp"

namespace emoface::nn {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer over a fixed list of parameters. Parameters
/// without an accumulated gradient are left untouched by step().
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Var> params, AdamOptions options);

  void step();
  void zero_grad();
  long steps_taken() const { return t_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_, v_;
  AdamOptions options_;
  long t_ = 0;
};

}  // namespace emoface::nn
