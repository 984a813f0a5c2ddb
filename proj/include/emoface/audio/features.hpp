#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "emoface/nn/tensor.hpp"

namespace emoface::audio {

inline constexpr int kNumChannels = 29;
inline constexpr int kWindow = 6;
inline constexpr double kFps = 30.0;

/// Per-frame character logits, T x 29, at 30 frames per second.
class AudioFeatureSequence {
 public:
  AudioFeatureSequence() = default;
  /// Row-major T x 29 values; T >= 1, all finite.
  explicit AudioFeatureSequence(std::vector<float> logits);

  std::size_t frames() const { return logits_.size() / kNumChannels; }
  float at(std::size_t t, int c) const { return logits_[t * kNumChannels + static_cast<std::size_t>(c)]; }
  std::span<const float> row(std::size_t t) const {
    return std::span<const float>(logits_).subspan(t * kNumChannels, kNumChannels);
  }
  const std::vector<float>& values() const { return logits_; }

  /// Frames [first, first + count).
  AudioFeatureSequence slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const AudioFeatureSequence&, const AudioFeatureSequence&) = default;

 private:
  std::vector<float> logits_;
};

/// Binary feature file: "AF01", uint32 T, uint32 C = 29, then T*C float32,
/// all little-endian. Errors carry the byte offset of the failure.
AudioFeatureSequence load_features(const std::filesystem::path& path);
AudioFeatureSequence parse_features(std::span<const std::uint8_t> bytes);
void save_features(const std::filesystem::path& path, const AudioFeatureSequence& seq);
std::vector<std::uint8_t> serialize_features(const AudioFeatureSequence& seq);

/// Row k of window t is frame clamp(t - 2 + k, 0, T - 1), k = 0..5.
struct FeatureWindowSequence {
  nn::Tensor windows;  // [T, 6, 29]

  std::size_t frames() const { return windows.empty() ? 0 : static_cast<std::size_t>(windows.dim(0)); }
};

FeatureWindowSequence window_features(const AudioFeatureSequence& seq);

/// Raw audio -> logits boundary; implementations must be deterministic.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual AudioFeatureSequence extract(const std::filesystem::path& audio_file) const = 0;
};

/// Stand-in for a speech recognizer: per-frame loudness modulates seeded,
/// temporally smoothed noise across the 29 channels.
class SyntheticExtractor : public FeatureExtractor {
 public:
  explicit SyntheticExtractor(std::uint64_t seed = 0) : seed_(seed) {}

  AudioFeatureSequence extract(const std::filesystem::path& wav_file) const override;
  /// Features for a given per-frame loudness envelope in [0, 1].
  AudioFeatureSequence from_envelope(std::span<const double> envelope) const;

 private:
  std::uint64_t seed_;
};

/// 16-bit PCM WAV reader (channels averaged); returns samples in [-1, 1].
std::vector<double> read_wav_mono(const std::filesystem::path& path, int* sample_rate);

}  // namespace emoface::audio
