#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emoface/audio/features.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::metrics {

/// Image -> fixed-length embedding. Implementations are deterministic.
class EmbeddingScorer {
 public:
  virtual ~EmbeddingScorer() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<double> embed(const nn::Tensor& image) const = 0;
};

/// 64-d stand-in: luma average-pooled onto an 8 x 8 grid, in [0, 1].
class PixelStatsEmbedder : public EmbeddingScorer {
 public:
  std::string name() const override { return "pixel-stats"; }
  int dim() const override { return 64; }
  std::vector<double> embed(const nn::Tensor& image) const override;
};

class EmotionClassifier {
 public:
  virtual ~EmotionClassifier() = default;
  virtual landmark_gen::Emotion classify(const nn::Tensor& image) const = 0;
};

/// Corner swatch colour of each category in synthetic frames (RGB in [-1, 1]).
std::array<float, 3> emotion_tag_color(landmark_gen::Emotion e);
/// Swatch side in pixels for a given frame size.
int emotion_tag_size(int resolution);

/// Reads the colour swatch that synthetic frames carry in their top-left
/// corner and returns the nearest category.
class TagEmotionClassifier : public EmotionClassifier {
 public:
  landmark_gen::Emotion classify(const nn::Tensor& image) const override;
};

class SyncScorer {
 public:
  virtual ~SyncScorer() = default;
  virtual double score(const std::vector<nn::Tensor>& frames, const audio::AudioFeatureSequence& features) const = 0;
};

/// Pearson correlation in [-1, 1] between the per-frame L2 norm of the
/// audio features and the mean absolute change of the lower-centre image
/// region against the first frame. 0 when either signal is constant.
class MotionEnergySyncScorer : public SyncScorer {
 public:
  double score(const std::vector<nn::Tensor>& frames, const audio::AudioFeatureSequence& features) const override;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// One generated video with what the scorers need.
struct ScoredVideo {
  std::vector<nn::Tensor> frames;
  nn::Tensor identity;
  std::optional<landmark_gen::Emotion> emotion;
  std::optional<audio::AudioFeatureSequence> features;
};

struct Scorers {
  const EmbeddingScorer* identity = nullptr;
  const EmotionClassifier* emotion = nullptr;
  const SyncScorer* sync = nullptr;
};

struct ScoredMetrics {
  std::optional<double> csim, emo_acc, sync_conf;
};

/// csim: mean cosine similarity of frame embeddings to the identity frame;
/// emo_acc: percentage of frames classified as their video's label;
/// sync_conf: mean scorer value. A missing backend (or no labelled video)
/// leaves its field empty and logs a warning to stderr.
ScoredMetrics scored_metrics(const std::vector<ScoredVideo>& videos, const Scorers& scorers);

}  // namespace emoface::metrics
