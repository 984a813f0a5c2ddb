#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "emoface/nn/tensor.hpp"

namespace emoface::landmark_gen {

inline constexpr int kNumEmotions = 6;
inline constexpr int kNumIntensities = 2;
inline constexpr int kEmotionDim = kNumEmotions + kNumIntensities;

enum class Emotion { kNeutral = -1, kHappy = 0, kAngry, kSad, kSurprise, kFear, kDisgust };
enum class Intensity { kNone = -1, kHigh = 0, kLow = 1 };

/// One-hot category (6) followed by one-hot intensity (2); neutral is all
/// zeros.
class EmotionVector {
 public:
  EmotionVector() = default;
  EmotionVector(Emotion emotion, Intensity intensity);
  /// Validates the one-hot rules; throws ContractError otherwise.
  static EmotionVector from_bits(const std::array<float, kEmotionDim>& bits);
  static EmotionVector neutral() { return EmotionVector(); }

  Emotion emotion() const { return emotion_; }
  Intensity intensity() const { return intensity_; }
  std::array<float, kEmotionDim> bits() const;
  bool is_neutral() const { return emotion_ == Emotion::kNeutral; }

  friend bool operator==(const EmotionVector&, const EmotionVector&) = default;

 private:
  Emotion emotion_ = Emotion::kNeutral;
  Intensity intensity_ = Intensity::kNone;
};

std::string_view emotion_name(Emotion e);
std::string_view intensity_name(Intensity i);
/// Case-sensitive lower-case names: neutral, happy, angry, sad, surprise,
/// fear, disgust / none, high, low.
std::optional<Emotion> parse_emotion(std::string_view name);
std::optional<Intensity> parse_intensity(std::string_view name);

/// [B, 8] batch tensor.
nn::Tensor emotion_batch(const std::vector<EmotionVector>& items);

}  // namespace emoface::landmark_gen
