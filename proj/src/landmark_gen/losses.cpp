#include "emoface/landmark_gen/losses.hpp"

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::landmark_gen {

using nn::Var;

Var loss_vertex(const Var& pred, const Var& gt) { return nn::mse_loss(pred, gt); }

double loss_vertex(const geometry::LandmarkSet& pred, const geometry::LandmarkSet& gt) {
  double acc = 0.0;
  for (int i = 0; i < geometry::kNumLandmarks; ++i) {
    const double dx = pred[i].x - gt[i].x, dy = pred[i].y - gt[i].y;
    acc += dx * dx + dy * dy;
  }
  return acc / (2.0 * geometry::kNumLandmarks);
}

LsganLosses lsgan_losses(const Var& d_real, const Var& d_fake) {
  LsganLosses out;
  Var real_term = nn::mean(nn::square(nn::add_scalar(d_real, -1.0f)));
  Var fake_term = nn::mean(nn::square(d_fake));
  out.discriminator = nn::scale(nn::add(real_term, fake_term), 0.5f);
  out.generator = nn::scale(nn::mean(nn::square(nn::add_scalar(d_fake, -1.0f))), 0.5f);
  return out;
}

LsganLosses lsgan_losses(const GraphDiscriminator& disc, const geometry::FaceGraph& real,
                         const geometry::FaceGraph& fake, const EmotionVector& e) {
  if (real.size() != geometry::kNumLandmarks || fake.size() != geometry::kNumLandmarks) {
    throw ContractError("lsgan_losses: graphs must have 68 vertices");
  }
  auto positions = [](const geometry::FaceGraph& g) {
    nn::Tensor t({1, geometry::kNumLandmarks, 2});
    for (int i = 0; i < geometry::kNumLandmarks; ++i) {
      t.at(0, i, 0) = static_cast<float>(g.vertices[static_cast<std::size_t>(i)].x);
      t.at(0, i, 1) = static_cast<float>(g.vertices[static_cast<std::size_t>(i)].y);
    }
    return nn::constant(std::move(t));
  };
  const nn::Tensor emotion = emotion_batch({e});
  return lsgan_losses(disc.score(positions(real), emotion), disc.score(positions(fake), emotion));
}

Var landmark_objective(const Var& l_ver, const Var& l_gan, const LandmarkLossWeights& weights) {
  return nn::add(nn::scale(l_ver, static_cast<float>(weights.vertex)), nn::scale(l_gan, static_cast<float>(weights.gan)));
}

double landmark_objective(double l_ver, double l_gan, const LandmarkLossWeights& weights) {
  return weights.vertex * l_ver + weights.gan * l_gan;
}

}  // namespace emoface::landmark_gen
