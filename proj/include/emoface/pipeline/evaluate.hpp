#pragma once

#include <filesystem>
#include <optional>

#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/metrics/report.hpp"
#include "emoface/metrics/scorers.hpp"

namespace emoface::pipeline {

struct EvaluateOptions {
  metrics::Scorers scorers;
  /// Label for the emotion-accuracy score; when absent it is read from the
  /// `<emotion>/<intensity>/<clip>` components of the reference path.
  std::optional<landmark_gen::Emotion> emotion;
};

/// Compares a generated frame directory (`%06d.png` plus `landmarks.txt`)
/// with a reference clip directory (`frames/` or bare PNGs, `landmarks.txt`,
/// optional `audio.af`). Frame and landmark counts must agree. Landmark
/// metrics are in pixels of the evaluated frames. The identity frame for
/// csim is `identity.png` in the prediction directory, else the first
/// reference frame.
metrics::MetricReport evaluate_dirs(const std::filesystem::path& pred, const std::filesystem::path& gt,
                                    const EvaluateOptions& options);

}  // namespace emoface::pipeline
