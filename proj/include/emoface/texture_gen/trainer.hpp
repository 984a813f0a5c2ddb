#pragma once

#include <span>
#include <vector>

#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/nn/optim.hpp"
#include "emoface/nn/rng.hpp"
#include "emoface/texture_gen/losses.hpp"

namespace emoface::texture_gen {

/// One (identity, graph pair, emotion, target) training example with the
/// heatmap difference already rendered.
struct TextureSample {
  nn::Tensor identity;  // [3, R, R]
  nn::Tensor heatmap;   // [69, R/4, R/4]
  landmark_gen::EmotionVector emotion;
  nn::Tensor target;  // [3, R, R]
};

struct TextureBatch {
  nn::Tensor identity, heatmap, emotion, target;  // batched along dim 0
};

TextureBatch make_texture_batch(const std::vector<const TextureSample*>& samples);
TextureBatch sample_texture_batch(std::span<const TextureSample> samples, std::size_t batch_size, nn::Rng& rng);

struct TextureTrainOptions {
  nn::AdamOptions generator;
  nn::AdamOptions discriminator;
  TextureLossWeights weights;
  bool adversarial = true;
};

struct TextureStepReport {
  double rec = 0.0;
  double per = 0.0;
  double adv = 0.0;
  double discriminator = 0.0;
  double total = 0.0;
};

/// Alternating frame-discriminator / generator updates. Single writer.
class TextureTrainer {
 public:
  TextureTrainer(GTModel& model, FrameDiscriminator& disc, const PerceptualExtractor& extractor,
                 const TextureTrainOptions& options);

  /// Throws TrainingDivergedError on a non-finite loss (no update applied).
  TextureStepReport step(const TextureBatch& batch);
  long steps() const { return steps_; }

 private:
  GTModel& model_;
  FrameDiscriminator& disc_;
  const PerceptualExtractor& extractor_;
  TextureTrainOptions options_;
  nn::Adam g_opt_, d_opt_;
  long steps_ = 0;
};

}  // namespace emoface::texture_gen
