#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "emoface/audio/features.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::pipeline {

using Color = std::array<float, 3>;  // RGB in [-1, 1]

/// A procedural subject: a perturbed canonical face, its placement in the
/// frame, and a palette.
struct SyntheticIdentity {
  geometry::LandmarkSet neutral_canonical;
  geometry::SimilarityTransform placement;  // canonical -> pixels
  int resolution = 64;
  Color background{}, skin{}, brow{}, lip{}, iris{};
};

SyntheticIdentity make_identity(std::uint64_t seed, int resolution);

/// Canonical-frame expression offsets; low intensity is half of high.
geometry::LandmarkDelta emotion_displacement(const landmark_gen::EmotionVector& e);
/// Jaw and lower-lip opening for a loudness value in [0, 1].
geometry::LandmarkDelta speech_displacement(double openness);

/// Syllable-like loudness envelope in [0, 1] at 30 fps.
std::vector<double> synthetic_envelope(std::size_t frames, std::uint64_t seed);

/// Flat-shaded, supersampled rendering of a face given pixel landmarks;
/// [3, R, R] in [-1, 1]. When `emotion_tag` is set, a small swatch in the
/// top-left corner encodes the emotion category (see metrics::emotion_tag_color).
nn::Tensor render_face(const SyntheticIdentity& identity, const geometry::LandmarkSet& pixel_landmarks,
                       const landmark_gen::EmotionVector* emotion_tag = nullptr);

struct SyntheticClip {
  landmark_gen::EmotionVector emotion;
  std::vector<double> envelope;
  audio::AudioFeatureSequence features;
  std::vector<geometry::LandmarkSet> canonical;  // neutral_canonical + offsets
  std::vector<geometry::LandmarkSet> pixel;      // placed in the frame
};

SyntheticClip make_clip(const SyntheticIdentity& identity, const landmark_gen::EmotionVector& emotion,
                        std::size_t frames, std::uint64_t seed);

struct SyntheticDatasetOptions {
  int subjects = 2;
  int clips_per_condition = 1;
  std::size_t frames = 30;
  int resolution = 64;
  /// Emotions rendered per subject besides neutral (at both intensities).
  std::vector<landmark_gen::Emotion> emotions = {landmark_gen::Emotion::kHappy, landmark_gen::Emotion::kAngry,
                                                 landmark_gen::Emotion::kSad,   landmark_gen::Emotion::kSurprise,
                                                 landmark_gen::Emotion::kFear,  landmark_gen::Emotion::kDisgust};
  std::uint64_t seed = 0;
};

/// Writes `<subject>/<emotion>/<intensity>/<clip>/{frames/, landmarks.txt,
/// audio.af}` under `root`; neutral clips use intensity "none". Each subject
/// also gets a `mask.png` foreground mask of its neutral pose.
void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticDatasetOptions& options);

/// Writes one clip directory (frames as %06d.png).
void write_clip(const std::filesystem::path& clip_dir, const SyntheticIdentity& identity, const SyntheticClip& clip,
                bool tag_emotion = true);

}  // namespace emoface::pipeline
