#pragma once

#include <span>
#include <vector>

#include "emoface/audio/features.hpp"
#include "emoface/landmark_gen/losses.hpp"
#include "emoface/landmark_gen/model.hpp"
#include "emoface/nn/optim.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::landmark_gen {

/// One training clip in canonical coordinates.
struct LandmarkClip {
  audio::FeatureWindowSequence windows;
  geometry::LandmarkSet neutral;
  EmotionVector emotion;
  std::vector<geometry::LandmarkSet> targets;  // one per window
};

struct LandmarkBatch {
  nn::Tensor audio;           // [6T, B, 29]
  nn::Tensor neutral;         // [B, 68, 2]
  nn::Tensor emotion;         // [B, 8]
  nn::Tensor target;          // [T, B, 68, 2]
  nn::Tensor frame_emotion;   // [T * B, 8], frame-major
};

LandmarkBatch make_landmark_batch(const std::vector<const LandmarkClip*>& clips, const std::vector<std::size_t>& starts,
                                  std::size_t length);
/// Random clips and crop offsets; clips shorter than `length` are rejected.
LandmarkBatch sample_landmark_batch(std::span<const LandmarkClip> clips, std::size_t batch_size, std::size_t length,
                                    nn::Rng& rng);

struct LandmarkTrainOptions {
  nn::AdamOptions generator;
  nn::AdamOptions discriminator;
  LandmarkLossWeights weights;
  bool adversarial = true;
};

struct LandmarkStepReport {
  double vertex = 0.0;
  double gan = 0.0;
  double discriminator = 0.0;
  double total = 0.0;
};

/// Alternating discriminator / generator updates. Single writer: the model
/// and discriminator must not be used elsewhere during step().
class LandmarkTrainer {
 public:
  LandmarkTrainer(GLModel& model, GraphDiscriminator& disc, const LandmarkTrainOptions& options);

  /// Throws TrainingDivergedError if a loss is not finite; parameters are
  /// not updated in that case.
  LandmarkStepReport step(const LandmarkBatch& batch);
  long steps() const { return steps_; }

 private:
  GLModel& model_;
  GraphDiscriminator& disc_;
  LandmarkTrainOptions options_;
  nn::Adam g_opt_, d_opt_;
  long steps_ = 0;
};

}  // namespace emoface::landmark_gen
