#include "emoface/landmark_gen/trainer.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::landmark_gen {

using nn::Tensor;
using nn::Var;

LandmarkBatch make_landmark_batch(const std::vector<const LandmarkClip*>& clips, const std::vector<std::size_t>& starts,
                                  std::size_t length) {
  if (clips.empty() || clips.size() != starts.size() || length == 0) {
    throw ContractError("make_landmark_batch: need one start per clip and a positive length");
  }
  const int b_count = static_cast<int>(clips.size()), t_count = static_cast<int>(length);
  std::vector<const audio::FeatureWindowSequence*> windows;
  std::vector<geometry::LandmarkSet> neutral;
  std::vector<EmotionVector> emotions;
  for (const auto* c : clips) {
    if (c->targets.size() != c->windows.frames()) throw ContractError("clip targets and audio lengths differ");
    windows.push_back(&c->windows);
    neutral.push_back(c->neutral);
    emotions.push_back(c->emotion);
  }
  LandmarkBatch batch;
  batch.audio = audio_input(windows, starts, length);
  batch.neutral = landmark_batch(neutral);
  batch.emotion = emotion_batch(emotions);
  batch.target = Tensor({t_count, b_count, geometry::kNumLandmarks, 2});
  batch.frame_emotion = Tensor({t_count * b_count, kEmotionDim});
  for (int t = 0; t < t_count; ++t) {
    for (int b = 0; b < b_count; ++b) {
      const auto& frame = clips[static_cast<std::size_t>(b)]->targets[starts[static_cast<std::size_t>(b)] + static_cast<std::size_t>(t)];
      for (int i = 0; i < geometry::kNumLandmarks; ++i) {
        batch.target.at(t, b, i, 0) = static_cast<float>(frame[i].x);
        batch.target.at(t, b, i, 1) = static_cast<float>(frame[i].y);
      }
      for (int k = 0; k < kEmotionDim; ++k) batch.frame_emotion.at(t * b_count + b, k) = batch.emotion.at(b, k);
    }
  }
  return batch;
}

LandmarkBatch sample_landmark_batch(std::span<const LandmarkClip> clips, std::size_t batch_size, std::size_t length,
                                    nn::Rng& rng) {
  if (clips.empty()) throw ContractError("sample_landmark_batch: no clips");
  std::vector<const LandmarkClip*> chosen;
  std::vector<std::size_t> starts;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto& clip = clips[rng.below(clips.size())];
    if (clip.windows.frames() < length) throw ContractError("sample_landmark_batch: clip shorter than crop length");
    chosen.push_back(&clip);
    starts.push_back(rng.below(clip.windows.frames() - length + 1));
  }
  return make_landmark_batch(chosen, starts, length);
}

LandmarkTrainer::LandmarkTrainer(GLModel& model, GraphDiscriminator& disc, const LandmarkTrainOptions& options)
    : model_(model),
      disc_(disc),
      options_(options),
      g_opt_(model.parameters().all(), options.generator),
      d_opt_(disc.parameters().all(), options.discriminator) {}

namespace {

void require_finite(double v, const char* what, long step) {
  if (!std::isfinite(v)) {
    throw TrainingDivergedError(std::string(what) + " became non-finite at step " + std::to_string(step));
  }
}

}  // namespace

LandmarkStepReport LandmarkTrainer::step(const LandmarkBatch& batch) {
  LandmarkStepReport report;
  const int t = batch.target.dim(0), b = batch.target.dim(1);
  model_.parameters().zero_grad();
  disc_.parameters().zero_grad();

  Var pred = model_.forward(batch.audio, batch.neutral, batch.emotion);
  Var target = nn::constant(batch.target);
  Var pred_frames = nn::reshape(pred, {t * b, geometry::kNumLandmarks, 2});
  Var target_frames = nn::constant(batch.target.reshaped({t * b, geometry::kNumLandmarks, 2}));

  if (options_.adversarial) {
    const LsganLosses d_losses = lsgan_losses(disc_.score(target_frames, batch.frame_emotion),
                                              disc_.score(nn::detach(pred_frames), batch.frame_emotion));
    report.discriminator = d_losses.discriminator.item();
    require_finite(report.discriminator, "discriminator loss", steps_);
    nn::backward(d_losses.discriminator);
    d_opt_.step();
    disc_.parameters().zero_grad();
  }

  Var l_ver = loss_vertex(pred, target);
  Var total = l_ver;
  report.vertex = l_ver.item();
  if (options_.adversarial) {
    const Var d_fake = disc_.score(pred_frames, batch.frame_emotion);
    const Var l_gan = nn::scale(nn::mean(nn::square(nn::add_scalar(d_fake, -1.0f))), 0.5f);
    report.gan = l_gan.item();
    total = landmark_objective(l_ver, l_gan, options_.weights);
  } else {
    total = nn::scale(l_ver, static_cast<float>(options_.weights.vertex));
  }
  report.total = total.item();
  require_finite(report.total, "landmark objective", steps_);
  nn::backward(total);
  g_opt_.step();
  disc_.parameters().zero_grad();
  ++steps_;
  return report;
}

}  // namespace emoface::landmark_gen
