#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "emoface/geometry/blink.hpp"

namespace emoface::pipeline {

/// Every tunable of the command-line tools. The file form is flat
/// `key = value` text; `#` starts a comment.
struct PipelineConfig {
  int resolution = 64;
  double fps = 30.0;
  std::uint64_t seed = 0;

  int gl_lstm_hidden = 256;
  int gl_lstm_layers = 3;
  int gt_base_width = 8;
  double gt_heatmap_sigma = 1.0;

  double lambda_ver = 1.0;
  double lambda_gan = 0.5;
  double lambda_rec = 1.0;
  double lambda_per = 10.0;
  double lambda_adv = 1.0;

  double lr_landmarks = 2e-4;
  double lr_texture = 2e-4;
  double lr_adapt = 2e-4;
  int batch_landmarks = 4;
  int batch_texture = 4;
  int sequence_length = 8;
  int steps_landmarks = 2000;
  int steps_texture = 5000;
  int adapt_steps = 5;

  /// "random" or "vgg16:<weights archive>".
  std::string perceptual = "random";
  /// "stub" selects the bundled deterministic backend, empty disables.
  std::string scorer_identity = "stub";
  std::string scorer_emotion = "stub";
  std::string scorer_sync = "stub";

  geometry::BlinkParams blink;
  int jobs = 1;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws ConfigError on unknown keys, malformed values or fps != 30.
PipelineConfig parse_config(const std::string& text);
std::string serialize_config(const PipelineConfig& config);

/// Reads a file (or defaults when `path` is empty), then applies the
/// EMOFACE_SEED environment override.
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

/// Validates ranges; throws ConfigError.
void validate_config(const PipelineConfig& config);

}  // namespace emoface::pipeline
