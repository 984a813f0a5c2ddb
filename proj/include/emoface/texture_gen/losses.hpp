#pragma once

#include <span>

#include "emoface/nn/autograd.hpp"
#include "emoface/texture_gen/model.hpp"
#include "emoface/texture_gen/perceptual.hpp"

namespace emoface::texture_gen {

struct TextureLossWeights {
  double rec = 1.0;
  double per = 10.0;
  double adv = 1.0;
};

/// Mean absolute pixel error.
nn::Var reconstruction_loss(const nn::Var& generated, const nn::Var& target);
/// Mean over feature levels of the mean absolute feature error. Target
/// features are treated as constants.
nn::Var perceptual_loss(const PerceptualExtractor& extractor, const nn::Var& generated, const nn::Var& target);

/// Generator side of the saturating objective, E[log(1 - D(I_E))] with
/// D = sigmoid(logits). Minimized by the generator.
nn::Var adversarial_generator_loss(const nn::Var& fake_logits);
/// -(E[log D(real)] + E[log(1 - D(fake))]); minimized by the discriminator.
nn::Var discriminator_loss(const nn::Var& real_logits, const nn::Var& fake_logits);
/// E[log p_real] + E[log(1 - p_fake)] for probabilities; 0 at the optimum.
double adversarial_value(std::span<const double> p_real, std::span<const double> p_fake);

nn::Var image_objective(const nn::Var& rec, const nn::Var& per, const nn::Var& adv, const TextureLossWeights& w);
double image_objective(double rec, double per, double adv, const TextureLossWeights& w);

struct TextureLosses {
  nn::Var rec, per, adv, total;
};

/// All components for a generated batch. `disc` may be null, in which case
/// the adversarial term is zero.
TextureLosses texture_losses(const nn::Var& generated, const nn::Tensor& target, const FrameDiscriminator* disc,
                             const PerceptualExtractor& extractor, const TextureLossWeights& weights);

}  // namespace emoface::texture_gen
