#include "emoface/landmark_gen/emotion.hpp"

#include <vector>

#include "emoface/errors.hpp"

namespace emoface::landmark_gen {

namespace {
constexpr std::string_view kEmotionNames[kNumEmotions] = {"happy", "angry", "sad", "surprise", "fear", "disgust"};
constexpr std::string_view kIntensityNames[kNumIntensities] = {"high", "low"};
}  // namespace

EmotionVector::EmotionVector(Emotion emotion, Intensity intensity) : emotion_(emotion), intensity_(intensity) {
  if ((emotion == Emotion::kNeutral) != (intensity == Intensity::kNone)) {
    throw ContractError("intensity must be set exactly when an emotion category is set");
  }
}

EmotionVector EmotionVector::from_bits(const std::array<float, kEmotionDim>& bits) {
  int category = -1, level = -1;
  for (int k = 0; k < kEmotionDim; ++k) {
    const float b = bits[static_cast<std::size_t>(k)];
    if (b == 0.0f) continue;
    if (b != 1.0f) throw ContractError("emotion vector entries must be 0 or 1");
    int& slot = k < kNumEmotions ? category : level;
    if (slot >= 0) throw ContractError("emotion vector has more than one bit set in a group");
    slot = k < kNumEmotions ? k : k - kNumEmotions;
  }
  return EmotionVector(static_cast<Emotion>(category), static_cast<Intensity>(level));
}

std::array<float, kEmotionDim> EmotionVector::bits() const {
  std::array<float, kEmotionDim> b{};
  if (emotion_ != Emotion::kNeutral) {
    b[static_cast<std::size_t>(emotion_)] = 1.0f;
    b[static_cast<std::size_t>(kNumEmotions + static_cast<int>(intensity_))] = 1.0f;
  }
  return b;
}

std::string_view emotion_name(Emotion e) {
  return e == Emotion::kNeutral ? "neutral" : kEmotionNames[static_cast<int>(e)];
}

std::string_view intensity_name(Intensity i) {
  return i == Intensity::kNone ? "none" : kIntensityNames[static_cast<int>(i)];
}

std::optional<Emotion> parse_emotion(std::string_view name) {
  if (name == "neutral") return Emotion::kNeutral;
  for (int k = 0; k < kNumEmotions; ++k)
    if (name == kEmotionNames[k]) return static_cast<Emotion>(k);
  return std::nullopt;
}

std::optional<Intensity> parse_intensity(std::string_view name) {
  if (name == "none") return Intensity::kNone;
  for (int k = 0; k < kNumIntensities; ++k)
    if (name == kIntensityNames[k]) return static_cast<Intensity>(k);
  return std::nullopt;
}

nn::Tensor emotion_batch(const std::vector<EmotionVector>& items) {
  nn::Tensor t({static_cast<int>(items.size()), kEmotionDim});
  for (std::size_t b = 0; b < items.size(); ++b) {
    const auto bits = items[b].bits();
    for (int k = 0; k < kEmotionDim; ++k) t.at(static_cast<int>(b), k) = bits[static_cast<std::size_t>(k)];
  }
  return t;
}

}  // namespace emoface::landmark_gen
