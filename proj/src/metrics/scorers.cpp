#include "emoface/metrics/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "emoface/errors.hpp"
#include "emoface/metrics/image_metrics.hpp"

namespace emoface::metrics {

using landmark_gen::Emotion;

std::array<float, 3> emotion_tag_color(Emotion e) {
  switch (e) {
    case Emotion::kNeutral: return {-1.0f, -1.0f, -1.0f};
    case Emotion::kHappy: return {1.0f, 1.0f, -1.0f};
    case Emotion::kAngry: return {1.0f, -1.0f, -1.0f};
    case Emotion::kSad: return {-1.0f, -1.0f, 1.0f};
    case Emotion::kSurprise: return {1.0f, 1.0f, 1.0f};
    case Emotion::kFear: return {1.0f, -1.0f, 1.0f};
    case Emotion::kDisgust: return {-1.0f, 1.0f, -1.0f};
  }
  return {0.0f, 0.0f, 0.0f};
}

int emotion_tag_size(int resolution) { return std::max(2, resolution / 16); }

std::vector<double> PixelStatsEmbedder::embed(const nn::Tensor& image) const {
  const std::vector<double> g = to_gray255(image);
  const int h = image.dim(1), w = image.dim(2);
  std::vector<double> out(64, 0.0), count(64, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int cell = (y * 8 / h) * 8 + x * 8 / w;
      out[static_cast<std::size_t>(cell)] += g[static_cast<std::size_t>(y) * w + x] / 255.0;
      count[static_cast<std::size_t>(cell)] += 1.0;
    }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = count[i] > 0.0 ? out[i] / count[i] : 0.0;
  return out;
}

Emotion TagEmotionClassifier::classify(const nn::Tensor& image) const {
  if (image.ndim() != 3 || image.dim(0) != 3) throw ContractError("classify: expected [3, H, W]");
  const int n = std::max(1, emotion_tag_size(image.dim(1)) / 2);
  double mean[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) mean[k] += image.at(k, y, x);
    mean[k] /= n * n;
  }
  const Emotion all[] = {Emotion::kNeutral,  Emotion::kHappy, Emotion::kAngry,  Emotion::kSad,
                         Emotion::kSurprise, Emotion::kFear,  Emotion::kDisgust};
  Emotion best = Emotion::kNeutral;
  double best_d = std::numeric_limits<double>::infinity();
  for (Emotion e : all) {
    const auto c = emotion_tag_color(e);
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double diff = mean[k] - c[static_cast<std::size_t>(k)];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double MotionEnergySyncScorer::score(const std::vector<nn::Tensor>& frames,
                                     const audio::AudioFeatureSequence& features) const {
  if (frames.empty()) return 0.0;
  const int h = frames.front().dim(1), w = frames.front().dim(2);
  const int y0 = h * 13 / 20, y1 = h * 17 / 20, x0 = w * 7 / 20, x1 = w * 13 / 20;
  const std::size_t n = std::min(frames.size(), features.frames());
  std::vector<double> motion(n), energy(n);
  for (std::size_t t = 0; t < n; ++t) {
    double m = 0.0;
    for (int k = 0; k < frames[t].dim(0); ++k)
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m += std::fabs(frames[t].at(k, y, x) - frames[0].at(k, y, x));
    motion[t] = m;
    double e = 0.0;
    for (float v : features.row(t)) e += static_cast<double>(v) * v;
    energy[t] = std::sqrt(e);
  }
  return pearson(motion, energy);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ContractError("cosine_similarity: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

ScoredMetrics scored_metrics(const std::vector<ScoredVideo>& videos, const Scorers& scorers) {
  ScoredMetrics out;
  if (scorers.identity) {
    double total = 0.0;
    long count = 0;
    for (const auto& v : videos) {
      if (v.identity.empty()) continue;
      const auto ref = scorers.identity->embed(v.identity);
      for (const auto& f : v.frames) {
        total += cosine_similarity(scorers.identity->embed(f), ref);
        ++count;
      }
    }
    if (count > 0) out.csim = total / static_cast<double>(count);
  } else {
    std::cerr << "warning: no identity embedder configured; csim omitted\n";
  }
  if (scorers.emotion) {
    long hits = 0, count = 0;
    for (const auto& v : videos) {
      if (!v.emotion) continue;
      for (const auto& f : v.frames) {
        hits += scorers.emotion->classify(f) == *v.emotion;
        ++count;
      }
    }
    if (count > 0) out.emo_acc = 100.0 * static_cast<double>(hits) / static_cast<double>(count);
  } else {
    std::cerr << "warning: no emotion classifier configured; emo_acc omitted\n";
  }
  if (scorers.sync) {
    double total = 0.0;
    long count = 0;
    for (const auto& v : videos) {
      if (!v.features) continue;
      total += scorers.sync->score(v.frames, *v.features);
      ++count;
    }
    if (count > 0) out.sync_conf = total / static_cast<double>(count);
  } else {
    std::cerr << "warning: no sync scorer configured; sync_conf omitted\n";
  }
  return out;
}

}  // namespace emoface::metrics
