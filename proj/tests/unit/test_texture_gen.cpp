#include <gtest/gtest.h>

#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/nn/ops.hpp"
#include "emoface/texture_gen/losses.hpp"
#include "emoface/texture_gen/model.hpp"
#include "emoface/texture_gen/perceptual.hpp"
#include "emoface/texture_gen/trainer.hpp"
#include "oracles.hpp"

using namespace emoface;
using namespace emoface::texture_gen;
using nn::Tensor;
using nn::Var;

namespace {

GTConfig tiny_config() {
  GTConfig c;
  c.resolution = 32;
  c.base_width = 4;
  c.emotion_dim = 8;
  c.seed = 2;
  return c;
}

Tensor zero_heatmap(const GTConfig& c, int n = 1) {
  return Tensor({n, geometry::kNumLandmarks + 1, c.heatmap_resolution(), c.heatmap_resolution()});
}

std::vector<TextureSample> toy_samples(const GTConfig& c, int count, std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<TextureSample> out;
  const int r = c.resolution;
  for (int k = 0; k < count; ++k) {
    TextureSample s;
    s.identity = Tensor({3, r, r});
    s.target = Tensor({3, r, r});
    const double cx = rng.uniform(0.3, 0.7) * r, cy = rng.uniform(0.3, 0.7) * r;
    for (int ch = 0; ch < 3; ++ch)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          const bool inside = std::hypot(i - cy, j - cx) < 0.3 * r;
          s.identity.at(ch, i, j) = inside ? 0.6f - 0.3f * ch : -0.5f;
          s.target.at(ch, i, j) = inside ? 0.4f - 0.2f * ch : -0.5f;
        }
    s.heatmap = zero_heatmap(c).reshaped({geometry::kNumLandmarks + 1, c.heatmap_resolution(), c.heatmap_resolution()});
    s.emotion = k % 2 ? landmark_gen::EmotionVector(landmark_gen::Emotion::kHappy, landmark_gen::Intensity::kHigh)
                      : landmark_gen::EmotionVector::neutral();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(Warp, ZeroFlowIsExactIdentity) {
  nn::Rng rng(1);
  const Tensor x = oracle::random_tensor(rng, {3, 9, 7});
  EXPECT_TRUE(warp(x, Tensor({2, 9, 7})).bitwise_equal(x));
}

TEST(Warp, OnePixelFlowShiftsColumns) {
  nn::Rng rng(2);
  const int h = 8, w = 16;
  const Tensor x = oracle::random_tensor(rng, {2, h, w});
  Tensor flow({2, h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) flow.at(0, i, j) = 2.0f / w;
  const Tensor y = warp(x, flow);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) EXPECT_EQ(y.at(c, i, j), x.at(c, i, std::min(j + 1, w - 1)));
}

TEST(Warp, LinearInInput) {
  nn::Rng rng(3);
  const Tensor a = oracle::random_tensor(rng, {1, 6, 6}), b = oracle::random_tensor(rng, {1, 6, 6});
  const Tensor flow = oracle::random_tensor(rng, {2, 6, 6}, -0.4, 0.4);
  Tensor sum = a;
  for (std::size_t k = 0; k < sum.numel(); ++k) sum[k] += b[k];
  const Tensor lhs = warp(sum, flow), wa = warp(a, flow), wb = warp(b, flow);
  for (std::size_t k = 0; k < lhs.numel(); ++k) EXPECT_NEAR(lhs[k], wa[k] + wb[k], 1e-6);
}

TEST(Model, IdentityEncoderShapes) {
  GTConfig c;
  GTModel m(c);
  nn::NoGradGuard guard;
  const IdentityFeatures f = m.encode_identity(nn::constant(Tensor({1, 3, 64, 64})));
  EXPECT_EQ(f.e3.shape(), (nn::Shape{1, 4 * c.base_width, 16, 16}));
  EXPECT_THROW(m.encode_identity(nn::constant(Tensor({1, 3, 32, 32}))), ContractError);
}

TEST(Model, FullWidthEncoderMatchesPublishedLayerList) {
  GTConfig c;
  c.resolution = 256;
  c.base_width = 64;
  GTModel m(c);
  nn::NoGradGuard guard;
  const IdentityFeatures f = m.encode_identity(nn::constant(Tensor({1, 3, 256, 256}, 0.1f)));
  EXPECT_EQ(f.e3.shape(), (nn::Shape{1, 256, 64, 64}));
}

TEST(Model, InitialMotionIsStill) {
  const GTConfig c = tiny_config();
  GTModel m(c);
  nn::NoGradGuard guard;
  nn::Rng rng(4);
  const IdentityFeatures id = m.encode_identity(nn::constant(oracle::random_tensor(rng, {1, 3, 32, 32})));
  const MotionField mf = m.predict_motion(nn::constant(zero_heatmap(c)), id,
                                          m.encode_emotion(landmark_gen::emotion_batch({landmark_gen::EmotionVector::neutral()})));
  for (float v : mf.flow.value().values()) EXPECT_EQ(v, 0.0f);
  for (float v : mf.occlusion.value().values()) EXPECT_EQ(v, 0.5f);
}

TEST(Model, ActivationRangesHoldForRandomWeights) {
  const GTConfig c = tiny_config();
  GTModel m(c);
  nn::Rng rng(5);
  for (auto& p : m.parameters().entries()) {
    Var v = p.var;
    for (auto& x : v.mutable_value().storage()) x = static_cast<float>(rng.normal(0.0, 2.0));
  }
  nn::NoGradGuard guard;
  const Tensor hm = oracle::random_tensor(rng, zero_heatmap(c).shape());
  const IdentityFeatures id = m.encode_identity(nn::constant(oracle::random_tensor(rng, {1, 3, 32, 32})));
  const MotionField mf =
      m.predict_motion(nn::constant(hm), id, m.encode_emotion(landmark_gen::emotion_batch({landmark_gen::EmotionVector::neutral()})));
  for (float v : mf.flow.value().values()) {
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
  for (float v : mf.occlusion.value().values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  const Var frame = m.decode_frame(mf, id);
  for (float v : frame.value().values()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, -1.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Model, StillMotionPassesSkipsThrough) {
  nn::Rng rng(6);
  const Var skip = nn::constant(oracle::random_tensor(rng, {1, 4, 8, 8}));
  const Var gated = nn::mul_channels(nn::grid_warp(skip, nn::constant(Tensor({1, 2, 8, 8}))),
                                     nn::constant(Tensor({1, 1, 8, 8}, 1.0f)));
  EXPECT_TRUE(gated.value().bitwise_equal(skip.value()));
}

TEST(Model, GenerateFrameIsDeterministic) {
  const GTConfig c = tiny_config();
  GTModel m(c);
  nn::Rng rng(7);
  const Tensor identity = oracle::random_tensor(rng, {3, 32, 32});
  const auto px = geometry::apply_transform(geometry::SimilarityTransform::from_params(28, 0, 2, 2),
                                            geometry::canonical_template(), false);
  const auto g = geometry::build_face_graph(px);
  const auto moved = geometry::with_positions(g, px.with_point(57, {px[57].x, px[57].y + 2}).span());
  const landmark_gen::EmotionVector e(landmark_gen::Emotion::kSad, landmark_gen::Intensity::kHigh);
  const Tensor a = generate_frame(m, identity, g, moved, e);
  EXPECT_EQ(a.shape(), (nn::Shape{3, 32, 32}));
  EXPECT_TRUE(generate_frame(m, identity, g, moved, e).bitwise_equal(a));
}

TEST(Perceptual, PyramidLevelsAndZeroAtIdentity) {
  RandomPyramidExtractor ext;
  nn::Rng rng(8);
  const Tensor img = oracle::random_tensor(rng, {1, 3, 32, 32});
  const auto f = perceptual_features(ext, img.reshaped({3, 32, 32}));
  ASSERT_EQ(f.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(f[static_cast<std::size_t>(k)].dim(2), 32 >> k);
  EXPECT_TRUE(perceptual_features(ext, img.reshaped({3, 32, 32}))[3].bitwise_equal(f[3]));
  EXPECT_EQ(perceptual_loss(ext, nn::constant(img), nn::constant(img)).item(), 0.0f);
  EXPECT_THROW(make_perceptual_extractor("alexnet"), ConfigError);
}

TEST(Losses, ImageObjectiveArithmetic) {
  EXPECT_DOUBLE_EQ(image_objective(0.2, 0.05, 0.7, {}), 0.2 + 10 * 0.05 + 0.7);
  nn::Rng rng(9);
  const Tensor img = oracle::random_tensor(rng, {2, 3, 16, 16});
  RandomPyramidExtractor ext;
  const TextureLosses l = texture_losses(nn::constant(img), img, nullptr, ext, {});
  EXPECT_EQ(l.rec.item(), 0.0f);
  EXPECT_EQ(l.per.item(), 0.0f);
}

TEST(Losses, AdversarialOptimumIsZero) {
  const std::vector<double> real = {1.0, 1.0}, fake = {0.0};
  EXPECT_DOUBLE_EQ(adversarial_value(real, fake), 0.0);
  const std::vector<double> half = {0.5};
  EXPECT_NEAR(adversarial_value(half, half), 2 * std::log(0.5), 1e-15);
  // Logit forms agree with the probability form.
  const Var z_r = nn::constant(Tensor({1}, 0.3f)), z_f = nn::constant(Tensor({1}, -0.8f));
  const double p_r = 1 / (1 + std::exp(-0.3)), p_f = 1 / (1 + std::exp(0.8));
  const std::vector<double> pr = {p_r}, pf = {p_f};
  EXPECT_NEAR(discriminator_loss(z_r, z_f).item(), -adversarial_value(pr, pf), 1e-6);
  EXPECT_NEAR(adversarial_generator_loss(z_f).item(), std::log1p(-p_f), 1e-6);
}

TEST(Trainer, ZeroAdvAndPerWeightsGivePureL1Update) {
  const GTConfig c = tiny_config();
  const auto samples = toy_samples(c, 2, 1);
  RandomPyramidExtractor ext;
  auto run = [&](bool adversarial) {
    GTModel m(c);
    FrameDiscriminator d(4, 3);
    TextureTrainOptions opt;
    opt.adversarial = adversarial;
    opt.weights.adv = 0.0;
    opt.weights.per = 0.0;
    TextureTrainer tr(m, d, ext, opt);
    nn::Rng rng(1);
    tr.step(sample_texture_batch(samples, 2, rng));
    return m.parameters().fingerprints();
  };
  const auto pure = [&] {
    GTModel m(c);
    nn::Adam opt(m.parameters().all(), {});
    nn::Rng rng(1);
    const TextureBatch b = sample_texture_batch(samples, 2, rng);
    nn::backward(reconstruction_loss(m.forward(b.identity, b.heatmap, b.emotion), nn::constant(b.target)));
    opt.step();
    return m.parameters().fingerprints();
  }();
  EXPECT_EQ(run(true), pure);
  EXPECT_EQ(run(false), pure);
}

TEST(Trainer, EqualSeedsAreBitwiseReproducible) {
  const GTConfig c = tiny_config();
  const auto samples = toy_samples(c, 3, 2);
  RandomPyramidExtractor ext;
  auto run = [&] {
    GTModel m(c);
    FrameDiscriminator d(4, 3);
    TextureTrainer tr(m, d, ext, {});
    nn::Rng rng(5);
    for (int s = 0; s < 3; ++s) tr.step(sample_texture_batch(samples, 2, rng));
    return std::pair(m.parameters().fingerprints(), d.parameters().fingerprints());
  };
  EXPECT_EQ(run(), run());
}

TEST(Trainer, ToySetReconstructionHalvesIn200Steps) {
  GTConfig c;
  c.resolution = 32;
  c.seed = 4;
  const auto samples = toy_samples(c, 4, 3);
  RandomPyramidExtractor ext;
  GTModel m(c);
  FrameDiscriminator d(8, 3);
  TextureTrainer tr(m, d, ext, {});
  std::vector<const TextureSample*> all;
  for (const auto& s : samples) all.push_back(&s);
  const TextureBatch full = make_texture_batch(all);
  auto rec = [&] {
    nn::NoGradGuard guard;
    return reconstruction_loss(m.forward(full.identity, full.heatmap, full.emotion), nn::constant(full.target)).item();
  };
  const double before = rec();
  nn::Rng rng(6);
  for (int s = 0; s < 200; ++s) tr.step(sample_texture_batch(samples, 4, rng));
  EXPECT_LE(rec(), 0.5 * before);
}
