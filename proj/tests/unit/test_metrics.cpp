#include <gtest/gtest.h>

#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/metrics/fid.hpp"
#include "emoface/metrics/image_metrics.hpp"
#include "emoface/metrics/landmark_metrics.hpp"
#include "emoface/metrics/report.hpp"
#include "emoface/metrics/scorers.hpp"
#include "emoface/pipeline/synthetic.hpp"
#include "oracles.hpp"

using namespace emoface;
using namespace emoface::metrics;
using nn::Tensor;

namespace {

// Image in [-1, 1] from values given on the [0, 1] scale.
Tensor from_unit(std::vector<float> unit, nn::Shape shape) {
  for (auto& v : unit) v = 2.0f * v - 1.0f;
  return Tensor(std::move(shape), std::move(unit));
}

Tensor edge_chart(int size) {
  Tensor img({3, size, size});
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const bool bar = ((j / 8) % 2 == 0) != ((i / 16) % 2 == 0);
        img.at(c, i, j) = bar ? 0.8f : -0.8f;
      }
  return img;
}

Tensor gaussian_blur(const Tensor& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double norm = 0.0;
  for (int t = -r; t <= r; ++t) norm += k[static_cast<std::size_t>(t + r)] = std::exp(-t * t / (2 * sigma * sigma));
  for (auto& v : k) v /= norm;
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  Tensor tmp(img.shape()), out(img.shape());
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        double a = 0.0;
        for (int t = -r; t <= r; ++t) a += k[static_cast<std::size_t>(t + r)] * img.at(ch, i, std::clamp(j + t, 0, w - 1));
        tmp.at(ch, i, j) = static_cast<float>(a);
      }
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        double a = 0.0;
        for (int t = -r; t <= r; ++t) a += k[static_cast<std::size_t>(t + r)] * tmp.at(ch, std::clamp(i + t, 0, h - 1), j);
        out.at(ch, i, j) = static_cast<float>(a);
      }
  return out;
}

std::vector<geometry::LandmarkSet> jittered_sequence(nn::Rng& rng, int frames) {
  std::vector<geometry::LandmarkSet> seq;
  for (int t = 0; t < frames; ++t) {
    geometry::LandmarkDelta d{};
    for (auto& p : d) p = {rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)};
    seq.push_back(geometry::canonical_template().as_canonical(false) + d);
  }
  return seq;
}

}  // namespace

TEST(Psnr, IdenticalImagesHitCap) {
  nn::Rng rng(1);
  const Tensor a = oracle::random_tensor(rng, {3, 8, 8});
  EXPECT_EQ(psnr(a, a), kPsnrCap);
}

TEST(Psnr, MseOfOneHundredthIsTwentyDecibels) {
  const Tensor a = from_unit(std::vector<float>(3 * 16, 0.5f), {3, 4, 4});
  const Tensor b = from_unit(std::vector<float>(3 * 16, 0.5f), {3, 4, 4});
  Tensor c = b;
  // +0.1 on the [0, 1] scale is +0.2 here.
  for (auto& v : c.storage()) v += 0.2f;
  EXPECT_NEAR(psnr(a, c), 20.0, 1e-5);
  EXPECT_THROW(psnr(a, Tensor({3, 4, 5})), ContractError);
}

TEST(Ssim, IdentitySymmetryAndNegative) {
  nn::Rng rng(2);
  std::vector<float> unit(3 * 32 * 32);
  for (auto& v : unit) v = static_cast<float>(rng.uniform(0.3, 0.7));
  const Tensor a = from_unit(unit, {3, 32, 32});
  Tensor neg = a;
  for (auto& v : neg.storage()) v = -v;  // 1 - x on the [0, 1] scale
  const Tensor b = oracle::random_tensor(rng, {3, 32, 32});
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_EQ(ssim(a, b), ssim(b, a));
  EXPECT_LE(ssim(a, neg), 0.0);
  EXPECT_THROW(ssim(Tensor({3, 8, 8}), Tensor({3, 8, 8})), ContractError);
}

TEST(Cpbd, RangeBlurAndConstant) {
  nn::Rng rng(3);
  for (int k = 0; k < 3; ++k) {
    const double s = cpbd(oracle::random_tensor(rng, {3, 64, 64}));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  const Tensor chart = edge_chart(128);
  EXPECT_LT(cpbd(gaussian_blur(chart, 2.0)), cpbd(chart));
  EXPECT_EQ(cpbd(Tensor({3, 64, 64}, 0.3f)), 0.0);
}

TEST(Fid, IdenticalSetsAndSymmetry) {
  nn::Rng rng(4);
  Eigen::MatrixXd a(400, 3), b(300, 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal(0.5, 1.5);
  EXPECT_LT(frechet_distance(a, a), 1e-6);
  EXPECT_EQ(frechet_distance(a, b), frechet_distance(b, a));
  EXPECT_THROW(frechet_distance(Eigen::MatrixXd(1, 3), a), ContractError);
}

TEST(Fid, ClosedFormForGaussians) {
  // Equal covariances: the trace term vanishes and the distance is |mu|^2.
  Eigen::VectorXd mu_a = Eigen::VectorXd::Zero(3), mu_b(3);
  mu_b << 1.0, -2.0, 0.5;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_NEAR(frechet_distance(mu_a, cov, mu_b, cov), mu_b.squaredNorm(), 1e-12);
  // Diagonal covariances: (sqrt(a) - sqrt(b))^2 per axis.
  Eigen::MatrixXd ca = Eigen::Vector3d(1, 4, 9).asDiagonal(), cb = Eigen::Vector3d(4, 1, 9).asDiagonal();
  EXPECT_NEAR(frechet_distance(mu_a, ca, mu_a, cb), 1.0 + 1.0 + 0.0, 1e-9);
}

TEST(Fid, SampledGaussiansApproachClosedForm) {
  nn::Rng rng(5);
  const int n = 4000, d = 4;
  Eigen::MatrixXd a(n, d), b(n, d);
  const double mu[d] = {1.0, 0.5, 0.0, -1.0};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      a(i, k) = rng.normal();
      b(i, k) = rng.normal() + mu[k];
    }
  EXPECT_NEAR(frechet_distance(a, b), 2.25, 0.15 * 2.25);
}

TEST(LandmarkDistance, IdentityAndOffset) {
  nn::Rng rng(6);
  const auto seq = jittered_sequence(rng, 5);
  const auto zero = landmark_distance(seq, seq, geometry::all_indices());
  EXPECT_EQ(zero.ld, 0.0);
  EXPECT_EQ(zero.lvd, 0.0);
  std::vector<geometry::LandmarkSet> shifted;
  geometry::LandmarkDelta one{};
  for (auto& p : one) p = {1.0, 0.0};
  for (const auto& f : seq) shifted.push_back(f + one);
  const auto off = landmark_distance(shifted, seq, geometry::mouth_indices());
  EXPECT_NEAR(off.ld, 1.0, 1e-12);
  EXPECT_NEAR(off.lvd, 0.0, 1e-12);
}

TEST(LandmarkDistance, MatchesBruteForce) {
  nn::Rng rng(7);
  const auto a = jittered_sequence(rng, 6), b = jittered_sequence(rng, 6);
  const auto subset = geometry::mouth_indices();
  double ld = 0.0, lvd = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (int i : subset) ld += std::hypot(a[t][i].x - b[t][i].x, a[t][i].y - b[t][i].y);
  for (std::size_t t = 1; t < a.size(); ++t)
    for (int i : subset) {
      const double vx = (a[t][i].x - a[t - 1][i].x) - (b[t][i].x - b[t - 1][i].x);
      const double vy = (a[t][i].y - a[t - 1][i].y) - (b[t][i].y - b[t - 1][i].y);
      lvd += std::hypot(vx, vy);
    }
  const auto got = landmark_distance(a, b, subset);
  EXPECT_NEAR(got.ld, ld / (a.size() * subset.size()), 1e-12);
  EXPECT_NEAR(got.lvd, lvd / ((a.size() - 1) * subset.size()), 1e-12);
  EXPECT_THROW(landmark_distance(std::span(a).first(3), b, subset), ContractError);
}

TEST(Scorers, CosineOfSameFrameIsOne) {
  nn::Rng rng(8);
  const Tensor f = oracle::random_tensor(rng, {3, 32, 32});
  PixelStatsEmbedder e;
  EXPECT_NEAR(cosine_similarity(e.embed(f), e.embed(f)), 1.0, 1e-12);
  EXPECT_EQ(static_cast<int>(e.embed(f).size()), e.dim());
}

TEST(Scorers, TagClassifierIsExactOnLabeledSynthetic) {
  using landmark_gen::Emotion;
  using landmark_gen::EmotionVector;
  using landmark_gen::Intensity;
  const auto id = pipeline::make_identity(3, 64);
  TagEmotionClassifier clf;
  std::vector<ScoredVideo> videos;
  for (Emotion e : {Emotion::kNeutral, Emotion::kHappy, Emotion::kAngry, Emotion::kSad, Emotion::kSurprise,
                    Emotion::kFear, Emotion::kDisgust}) {
    const EmotionVector v = e == Emotion::kNeutral ? EmotionVector::neutral() : EmotionVector(e, Intensity::kHigh);
    const auto clip = pipeline::make_clip(id, v, 2, 1);
    ScoredVideo video;
    for (const auto& lm : clip.pixel) video.frames.push_back(pipeline::render_face(id, lm, &v));
    video.emotion = e;
    videos.push_back(std::move(video));
  }
  Scorers s;
  s.emotion = &clf;
  const ScoredMetrics m = scored_metrics(videos, s);
  ASSERT_TRUE(m.emo_acc.has_value());
  EXPECT_EQ(*m.emo_acc, 100.0);
  EXPECT_FALSE(m.csim.has_value());
  EXPECT_FALSE(m.sync_conf.has_value());
}

TEST(Report, RoundTripAndAbsentFields) {
  MetricReport r;
  r.psnr = 30.06;
  r.m_ld = 2.18;
  r.csim = 0.5;
  const std::string text = format_report(r);
  EXPECT_EQ(text.find("emo_acc"), std::string::npos);
  const MetricReport back = parse_report(text);
  EXPECT_EQ(back.psnr, 30.06);
  EXPECT_EQ(back.m_ld, 2.18);
  EXPECT_EQ(back.csim, 0.5);
  EXPECT_FALSE(back.emo_acc.has_value());
  EXPECT_THROW(parse_report("{\"psnr\": 1}"), FormatError);
  EXPECT_THROW(parse_report("not json"), FormatError);
}
