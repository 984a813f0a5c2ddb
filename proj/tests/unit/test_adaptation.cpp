#include <gtest/gtest.h>

#include "emoface/adaptation/adaptation.hpp"
#include "emoface/adaptation/image_ops.hpp"
#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/texture_gen/perceptual.hpp"
#include "oracles.hpp"

using namespace emoface;
using namespace emoface::adaptation;
using nn::Tensor;

namespace {

bool in_scope(const std::string& name) {
  for (const auto& prefix : texture_gen::GTModel::adaptation_scope())
    if (name.rfind(prefix, 0) == 0) return true;
  return false;
}

texture_gen::GTConfig tiny_config() {
  texture_gen::GTConfig c;
  c.resolution = 32;
  c.base_width = 4;
  c.emotion_dim = 8;
  return c;
}

}  // namespace

TEST(Composite, MaskExtremes) {
  nn::Rng rng(1);
  const Tensor face = oracle::random_tensor(rng, {3, 5, 6}), bg = oracle::random_tensor(rng, {3, 5, 6});
  EXPECT_TRUE(replace_background(face, bg, Tensor({1, 5, 6}, 1.0f)).bitwise_equal(face));
  EXPECT_TRUE(replace_background(face, bg, Tensor({1, 5, 6}, 0.0f)).bitwise_equal(bg));
}

TEST(Composite, ReplaceThenRestoreIsExact) {
  nn::Rng rng(2);
  const Tensor face = oracle::random_tensor(rng, {3, 16, 16}), bg = oracle::random_tensor(rng, {3, 16, 16});
  const Tensor mask = heuristic_face_mask(16, 16);
  const Tensor swapped = replace_background(face, bg, mask);
  EXPECT_TRUE(restore_background(swapped, face, mask).bitwise_equal(face));
}

TEST(Composite, RejectsBadMasks) {
  const Tensor img({3, 4, 4});
  EXPECT_THROW(replace_background(img, img, Tensor({1, 4, 4}, 0.5f)), ContractError);
  EXPECT_THROW(replace_background(img, img, Tensor({1, 4, 5}, 1.0f)), ContractError);
  EXPECT_THROW(replace_background(img, Tensor({3, 4, 5}), Tensor({1, 4, 4}, 1.0f)), ContractError);
}

TEST(Mask, CoversLandmarksAndIsBinary) {
  const auto px = geometry::apply_transform(geometry::SimilarityTransform::from_params(40, 0, 12, 10),
                                            geometry::canonical_template(), false);
  const Tensor m = heuristic_face_mask(64, 64, &px);
  for (float v : m.values()) EXPECT_TRUE(v == 0.0f || v == 1.0f);
  for (const auto& p : px.points()) EXPECT_EQ(m.at(0, static_cast<int>(p.y), static_cast<int>(p.x)), 1.0f);
  EXPECT_EQ(m.at(0, 0, 0), 0.0f);
}

TEST(Augment, ZeroJitterIsIdentity) {
  nn::Rng rng(3);
  const Tensor img = oracle::random_tensor(rng, {3, 8, 8});
  EXPECT_TRUE(augment(img, 5, {0.0, 0.0, 0.0}).bitwise_equal(img));
}

TEST(Augment, SeededAndClamped) {
  nn::Rng rng(4);
  const Tensor img = oracle::random_tensor(rng, {3, 8, 8});
  EXPECT_TRUE(augment(img, 9).bitwise_equal(augment(img, 9)));
  EXPECT_FALSE(augment(img, 9).bitwise_equal(augment(img, 10)));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor out = augment(img, seed, {5.0, 5.0, 0.5});
    for (float v : out.values()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(OneShot, OnlyScopeParametersChange) {
  const texture_gen::GTModel model(tiny_config());
  texture_gen::RandomPyramidExtractor ext;
  nn::Rng rng(5);
  const Tensor id = oracle::random_tensor(rng, {3, 32, 32});
  const AdaptationResult r = one_shot_finetune(model, id, {}, ext);
  EXPECT_EQ(r.steps, kMaxAdaptationSteps);
  const auto before = model.parameters().fingerprints();
  const auto after = r.model.parameters().fingerprints();
  int changed = 0;
  for (const auto& [name, hash] : before) {
    if (in_scope(name)) {
      changed += after.at(name) != hash;
    } else {
      EXPECT_EQ(after.at(name), hash) << name;
    }
  }
  EXPECT_GT(changed, 0);
  for (const auto& name : {"motion_encoder.", "motion_decoder.", "emotion_encoder"}) EXPECT_FALSE(in_scope(name));
}

TEST(OneShot, StepLimitIsEnforced) {
  const texture_gen::GTModel model(tiny_config());
  texture_gen::RandomPyramidExtractor ext;
  const Tensor id({3, 32, 32});
  AdaptationConfig cfg;
  cfg.max_steps = 6;
  EXPECT_THROW(one_shot_finetune(model, id, cfg, ext), ContractError);
  cfg.max_steps = 0;
  const AdaptationResult r = one_shot_finetune(model, id, cfg, ext);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.model.parameters().fingerprints(), model.parameters().fingerprints());
  EXPECT_THROW(one_shot_finetune(model, Tensor({3, 64, 64}), {}, ext), ContractError);
}

TEST(OneShot, IsDeterministic) {
  const texture_gen::GTModel model(tiny_config());
  texture_gen::RandomPyramidExtractor ext;
  nn::Rng rng(6);
  const Tensor id = oracle::random_tensor(rng, {3, 32, 32});
  EXPECT_EQ(one_shot_finetune(model, id, {}, ext).model.parameters().fingerprints(),
            one_shot_finetune(model, id, {}, ext).model.parameters().fingerprints());
}
