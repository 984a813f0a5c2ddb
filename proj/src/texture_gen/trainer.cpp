#include "emoface/texture_gen/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::texture_gen {

using nn::Tensor;
using nn::Var;

namespace {

Tensor stack(const std::vector<const Tensor*>& items) {
  nn::Shape s = items.front()->shape();
  for (const auto* t : items) {
    if (t->shape() != s) throw ContractError("texture batch: inconsistent sample shapes");
  }
  s.insert(s.begin(), static_cast<int>(items.size()));
  Tensor out(s);
  float* dst = out.data();
  for (const auto* t : items) dst = std::copy(t->data(), t->data() + t->numel(), dst);
  return out;
}

void require_finite(double v, const char* what, long step) {
  if (!std::isfinite(v)) {
    throw TrainingDivergedError(std::string(what) + " became non-finite at step " + std::to_string(step));
  }
}

}  // namespace

TextureBatch make_texture_batch(const std::vector<const TextureSample*>& samples) {
  if (samples.empty()) throw ContractError("make_texture_batch: no samples");
  std::vector<const Tensor*> id, hm, tg;
  std::vector<landmark_gen::EmotionVector> emo;
  for (const auto* s : samples) {
    id.push_back(&s->identity);
    hm.push_back(&s->heatmap);
    tg.push_back(&s->target);
    emo.push_back(s->emotion);
  }
  return {stack(id), stack(hm), landmark_gen::emotion_batch(emo), stack(tg)};
}

TextureBatch sample_texture_batch(std::span<const TextureSample> samples, std::size_t batch_size, nn::Rng& rng) {
  if (samples.empty()) throw ContractError("sample_texture_batch: no samples");
  std::vector<const TextureSample*> chosen;
  for (std::size_t b = 0; b < batch_size; ++b) chosen.push_back(&samples[rng.below(samples.size())]);
  return make_texture_batch(chosen);
}

TextureTrainer::TextureTrainer(GTModel& model, FrameDiscriminator& disc, const PerceptualExtractor& extractor,
                               const TextureTrainOptions& options)
    : model_(model),
      disc_(disc),
      extractor_(extractor),
      options_(options),
      g_opt_(model.parameters().all(), options.generator),
      d_opt_(disc.parameters().all(), options.discriminator) {}

TextureStepReport TextureTrainer::step(const TextureBatch& batch) {
  TextureStepReport report;
  model_.parameters().zero_grad();
  disc_.parameters().zero_grad();
  const bool adversarial = options_.adversarial && options_.weights.adv != 0.0;

  Var generated = model_.forward(batch.identity, batch.heatmap, batch.emotion);
  if (adversarial) {
    Var d_loss = discriminator_loss(disc_.logits(nn::constant(batch.target)), disc_.logits(nn::detach(generated)));
    report.discriminator = d_loss.item();
    require_finite(report.discriminator, "frame discriminator loss", steps_);
    nn::backward(d_loss);
    d_opt_.step();
    disc_.parameters().zero_grad();
  }

  const TextureLosses losses =
      texture_losses(generated, batch.target, adversarial ? &disc_ : nullptr, extractor_, options_.weights);
  report.rec = losses.rec.item();
  report.per = losses.per.item();
  report.adv = losses.adv.item();
  report.total = losses.total.item();
  require_finite(report.total, "image objective", steps_);
  nn::backward(losses.total);
  g_opt_.step();
  disc_.parameters().zero_grad();
  ++steps_;
  return report;
}

}  // namespace emoface::texture_gen
