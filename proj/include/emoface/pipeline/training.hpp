#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "emoface/geometry/alignment.hpp"
#include "emoface/landmark_gen/trainer.hpp"
#include "emoface/pipeline/config.hpp"
#include "emoface/pipeline/dataset.hpp"
#include "emoface/texture_gen/trainer.hpp"

namespace emoface::pipeline {

/// Per-subject reference: the first frame of the subject's first neutral
/// clip, and the similarity taking it onto the canonical template.
struct SubjectReference {
  geometry::LandmarkSet neutral_pixels;
  geometry::LandmarkSet neutral_canonical;
  geometry::SimilarityTransform to_canonical;
  std::filesystem::path neutral_image;
};

/// Subjects without a neutral clip are left out (warning on stderr).
std::map<std::string, SubjectReference> subject_references(const DatasetIndex& index);

/// Canonical-frame training clips: every frame of a subject is mapped with
/// that subject's neutral alignment, so expressions are preserved.
std::vector<landmark_gen::LandmarkClip> landmark_clips(const DatasetIndex& index, Split split);

struct PreprocessSummary {
  std::size_t clips = 0;
  std::size_t subjects = 0;
};

/// Writes `template.txt` and one `canonical.txt` per clip under `out`,
/// mirroring the dataset layout.
PreprocessSummary preprocess_dataset(const std::filesystem::path& root, const std::filesystem::path& out);

struct TextureSampleOptions {
  /// Frames taken from each clip, evenly spaced.
  std::size_t frames_per_clip = 4;
  /// Colour-jitter the (identity, target) pair with one shared seed.
  bool augment = false;
  std::uint64_t seed = 0;
};

/// Identity = the subject's neutral image; target = a clip frame; heatmap
/// from the pixel landmarks of both. Frames must match the model resolution.
std::vector<texture_gen::TextureSample> texture_samples(const DatasetIndex& index, Split split,
                                                        const texture_gen::GTConfig& config,
                                                        const TextureSampleOptions& options);

using LandmarkLog = std::function<void(long step, const landmark_gen::LandmarkStepReport&)>;
using TextureLog = std::function<void(long step, const texture_gen::TextureStepReport&)>;

landmark_gen::GLConfig landmark_config(const PipelineConfig& config);
texture_gen::GTConfig texture_config(const PipelineConfig& config);
landmark_gen::LandmarkTrainOptions landmark_train_options(const PipelineConfig& config);
texture_gen::TextureTrainOptions texture_train_options(const PipelineConfig& config);

/// Runs `steps` alternating updates on random crops of the clips.
void train_landmarks(landmark_gen::GLModel& model, landmark_gen::GraphDiscriminator& disc,
                     std::span<const landmark_gen::LandmarkClip> clips, const PipelineConfig& config, long steps,
                     const LandmarkLog& log = {});
void train_texture(texture_gen::GTModel& model, texture_gen::FrameDiscriminator& disc,
                   std::span<const texture_gen::TextureSample> samples, const texture_gen::PerceptualExtractor& extractor,
                   const PipelineConfig& config, long steps, const TextureLog& log = {});

}  // namespace emoface::pipeline
