#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "emoface/adaptation/adaptation.hpp"
#include "emoface/audio/features.hpp"
#include "emoface/geometry/blink.hpp"
#include "emoface/landmark_gen/model.hpp"
#include "emoface/texture_gen/model.hpp"

namespace emoface::pipeline {

struct AnimateInputs {
  nn::Tensor identity;                         // [3, R, R] in [-1, 1]
  geometry::LandmarkSet identity_landmarks;    // pixel coordinates of `identity`
  audio::AudioFeatureSequence features;
  landmark_gen::EmotionVector emotion;
  /// Foreground mask [1, R, R] and replacement background [3, R, R]; both
  /// or neither.
  std::optional<nn::Tensor> mask;
  std::optional<nn::Tensor> background;
};

struct AnimateOptions {
  int jobs = 1;
  std::uint64_t seed = 0;
  bool blinks = true;
  geometry::BlinkParams blink;
  /// When set, the texture model is first tuned on the identity image.
  std::optional<adaptation::AdaptationConfig> adapt;
  const texture_gen::PerceptualExtractor* extractor = nullptr;
};

struct AnimationResult {
  std::vector<nn::Tensor> frames;                   // one per audio frame
  std::vector<geometry::LandmarkSet> landmarks;     // pixel coordinates
};

/// background replacement -> optional adaptation -> landmark inference ->
/// blinks -> retargeting -> per-frame texture (`jobs` workers) -> background
/// restoration. Stage failures are rethrown as StageError.
AnimationResult animate(const landmark_gen::GLModel& gl, const texture_gen::GTModel& gt, const AnimateInputs& inputs,
                        const AnimateOptions& options);

/// animate() then writes `%06d.png` frames and `landmarks.txt` into
/// `out_dir`; returns the frame paths in order.
std::vector<std::filesystem::path> animate_to_dir(const landmark_gen::GLModel& gl, const texture_gen::GTModel& gt,
                                                  const AnimateInputs& inputs, const AnimateOptions& options,
                                                  const std::filesystem::path& out_dir);

/// `%06d.png` for frame index t.
std::string frame_name(std::size_t t);

}  // namespace emoface::pipeline
