#include "emoface/adaptation/adaptation.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/nn/ops.hpp"
#include "emoface/nn/optim.hpp"
#include "emoface/texture_gen/losses.hpp"

namespace emoface::adaptation {

AdaptationResult one_shot_finetune(const texture_gen::GTModel& model, const nn::Tensor& identity,
                                   const AdaptationConfig& config, const texture_gen::PerceptualExtractor& extractor) {
  if (config.max_steps < 0 || config.max_steps > kMaxAdaptationSteps) {
    throw ContractError("one_shot_finetune: max_steps must lie in [0, 5], got " + std::to_string(config.max_steps));
  }
  const int r = model.config().resolution;
  if (identity.shape() != nn::Shape{3, r, r}) {
    throw ContractError("one_shot_finetune: identity must be [3, " + std::to_string(r) + ", " + std::to_string(r) +
                        "], got " + nn::shape_string(identity.shape()));
  }
  AdaptationResult result{model.clone()};
  texture_gen::GTModel& tuned = result.model;
  const int h = model.config().heatmap_resolution();
  const nn::Tensor image = texture_gen::batched(identity);
  const nn::Tensor no_motion({1, geometry::kNumLandmarks + 1, h, h});
  const nn::Tensor neutral = landmark_gen::emotion_batch({landmark_gen::EmotionVector::neutral()});
  const nn::Var target = nn::constant(image);

  auto rec_now = [&] {
    nn::NoGradGuard guard;
    return static_cast<double>(nn::l1_loss(tuned.forward(image, no_motion, neutral), target).item());
  };

  result.rec_before = rec_now();
  nn::Adam opt(tuned.parameters().select(texture_gen::GTModel::adaptation_scope()),
               nn::AdamOptions{.lr = config.learning_rate});
  for (int step = 0; step < config.max_steps; ++step) {
    tuned.parameters().zero_grad();
    const nn::Var out = tuned.forward(image, no_motion, neutral);
    const nn::Var loss = nn::add(texture_gen::reconstruction_loss(out, target),
                                 nn::scale(texture_gen::perceptual_loss(extractor, out, target),
                                           static_cast<float>(config.lambda_per)));
    if (!std::isfinite(loss.item())) throw TrainingDivergedError("one_shot_finetune: non-finite loss");
    nn::backward(loss);
    opt.step();
    ++result.steps;
  }
  result.rec_after = rec_now();
  return result;
}

}  // namespace emoface::adaptation
