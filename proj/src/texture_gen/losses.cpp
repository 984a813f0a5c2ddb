#include "emoface/texture_gen/losses.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::texture_gen {

using nn::Var;

Var reconstruction_loss(const Var& generated, const Var& target) { return nn::l1_loss(generated, target); }

Var perceptual_loss(const PerceptualExtractor& extractor, const Var& generated, const Var& target) {
  std::vector<Var> target_features;
  {
    nn::NoGradGuard guard;
    target_features = extractor.features(nn::detach(target));
  }
  const std::vector<Var> generated_features = extractor.features(generated);
  if (generated_features.size() != target_features.size() || generated_features.empty()) {
    throw ContractError("perceptual_loss: extractor returned inconsistent levels");
  }
  Var total = nn::l1_loss(generated_features[0], target_features[0]);
  for (std::size_t k = 1; k < generated_features.size(); ++k) {
    total = nn::add(total, nn::l1_loss(generated_features[k], target_features[k]));
  }
  return nn::scale(total, 1.0f / static_cast<float>(generated_features.size()));
}

Var adversarial_generator_loss(const Var& fake_logits) {
  // log(1 - sigmoid(z)) = -softplus(z)
  return nn::scale(nn::mean(nn::softplus(fake_logits)), -1.0f);
}

Var discriminator_loss(const Var& real_logits, const Var& fake_logits) {
  // -log sigmoid(z) = softplus(-z)
  return nn::add(nn::mean(nn::softplus(nn::scale(real_logits, -1.0f))), nn::mean(nn::softplus(fake_logits)));
}

double adversarial_value(std::span<const double> p_real, std::span<const double> p_fake) {
  if (p_real.empty() || p_fake.empty()) throw ContractError("adversarial_value: empty input");
  double a = 0.0, b = 0.0;
  for (double p : p_real) a += std::log(p);
  for (double p : p_fake) b += std::log1p(-p);
  return a / static_cast<double>(p_real.size()) + b / static_cast<double>(p_fake.size());
}

Var image_objective(const Var& rec, const Var& per, const Var& adv, const TextureLossWeights& w) {
  return nn::add(nn::add(nn::scale(rec, static_cast<float>(w.rec)), nn::scale(per, static_cast<float>(w.per))),
                 nn::scale(adv, static_cast<float>(w.adv)));
}

double image_objective(double rec, double per, double adv, const TextureLossWeights& w) {
  return w.rec * rec + w.per * per + w.adv * adv;
}

TextureLosses texture_losses(const Var& generated, const nn::Tensor& target, const FrameDiscriminator* disc,
                             const PerceptualExtractor& extractor, const TextureLossWeights& weights) {
  if (generated.shape() != target.shape()) throw ContractError("texture_losses: shape mismatch");
  const Var tgt = nn::constant(target);
  TextureLosses out;
  out.rec = reconstruction_loss(generated, tgt);
  out.per = weights.per != 0.0 ? perceptual_loss(extractor, generated, tgt) : nn::constant(nn::Tensor::scalar(0.0f));
  out.adv = (disc && weights.adv != 0.0) ? adversarial_generator_loss(disc->logits(generated))
                                         : nn::constant(nn::Tensor::scalar(0.0f));
  out.total = image_objective(out.rec, out.per, out.adv, weights);
  return out;
}

}  // namespace emoface::texture_gen
