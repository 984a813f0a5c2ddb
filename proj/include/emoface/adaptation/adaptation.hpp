#pragma once

#include "emoface/nn/tensor.hpp"
#include "emoface/texture_gen/model.hpp"
#include "emoface/texture_gen/perceptual.hpp"

namespace emoface::adaptation {

inline constexpr int kMaxAdaptationSteps = 5;

/// The trainable scope is fixed to GTModel::adaptation_scope().
struct AdaptationConfig {
  int max_steps = kMaxAdaptationSteps;
  double learning_rate = 2e-4;
  /// Weight of the perceptual term next to the L1 reconstruction.
  double lambda_per = 10.0;
};

struct AdaptationResult {
  texture_gen::GTModel model;
  int steps = 0;
  /// L1 reconstruction of the identity image before and after tuning.
  double rec_before = 0.0;
  double rec_after = 0.0;
};

/// Fine-tunes a copy of `model` to reproduce the neutral image `identity`
/// [3, R, R] from itself (zero heatmap difference, neutral emotion). Only
/// parameters in the adaptation scope change. Throws ContractError when
/// max_steps is outside [0, 5] or the image does not match the model.
AdaptationResult one_shot_finetune(const texture_gen::GTModel& model, const nn::Tensor& identity,
                                   const AdaptationConfig& config, const texture_gen::PerceptualExtractor& extractor);

}  // namespace emoface::adaptation
