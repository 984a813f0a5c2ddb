#pragma once

#include "emoface/geometry/face_graph.hpp"
#include "emoface/geometry/landmarks.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/landmark_gen/model.hpp"
#include "emoface/nn/autograd.hpp"

namespace emoface::landmark_gen {

struct LandmarkLossWeights {
  double vertex = 1.0;
  double gan = 0.5;
};

/// Mean over all coordinates of the squared error.
nn::Var loss_vertex(const nn::Var& pred, const nn::Var& gt);
double loss_vertex(const geometry::LandmarkSet& pred, const geometry::LandmarkSet& gt);

struct LsganLosses {
  nn::Var discriminator;  // ((D(real) - 1)^2 + D(fake)^2) / 2, batch mean
  nn::Var generator;      // (D(fake) - 1)^2 / 2, batch mean
};

/// From precomputed discriminator outputs.
LsganLosses lsgan_losses(const nn::Var& d_real, const nn::Var& d_fake);
/// Scores both graphs' vertex positions with `disc`.
LsganLosses lsgan_losses(const GraphDiscriminator& disc, const geometry::FaceGraph& real,
                         const geometry::FaceGraph& fake, const EmotionVector& e);

/// weights.vertex * l_ver + weights.gan * l_gan.
nn::Var landmark_objective(const nn::Var& l_ver, const nn::Var& l_gan, const LandmarkLossWeights& weights);
double landmark_objective(double l_ver, double l_gan, const LandmarkLossWeights& weights);

}  // namespace emoface::landmark_gen
