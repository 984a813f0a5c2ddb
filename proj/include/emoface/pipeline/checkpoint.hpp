#pragma once

#include <filesystem>
#include <optional>

#include "emoface/landmark_gen/model.hpp"
#include "emoface/nn/archive.hpp"
#include "emoface/texture_gen/model.hpp"

namespace emoface::pipeline {

/// Landmark generator (and optionally its critic) with the model config and
/// topology template stored as archive metadata.
struct LandmarkCheckpoint {
  landmark_gen::GLModel model;
  std::optional<landmark_gen::GraphDiscriminator> discriminator;
};

struct TextureCheckpoint {
  texture_gen::GTModel model;
  std::optional<texture_gen::FrameDiscriminator> discriminator;
};

nn::Archive landmark_archive(const landmark_gen::GLModel& model,
                             const landmark_gen::GraphDiscriminator* disc = nullptr);
LandmarkCheckpoint landmark_from_archive(const nn::Archive& archive);
void save_landmark_checkpoint(const std::filesystem::path& path, const landmark_gen::GLModel& model,
                              const landmark_gen::GraphDiscriminator* disc = nullptr);
/// Throws FormatError / VersionError from the archive layer and ConfigError
/// when the archive holds a different model kind.
LandmarkCheckpoint load_landmark_checkpoint(const std::filesystem::path& path);

nn::Archive texture_archive(const texture_gen::GTModel& model, const texture_gen::FrameDiscriminator* disc = nullptr);
TextureCheckpoint texture_from_archive(const nn::Archive& archive);
void save_texture_checkpoint(const std::filesystem::path& path, const texture_gen::GTModel& model,
                             const texture_gen::FrameDiscriminator* disc = nullptr);
TextureCheckpoint load_texture_checkpoint(const std::filesystem::path& path);

}  // namespace emoface::pipeline
