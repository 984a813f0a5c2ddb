#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emoface/audio/features.hpp"
#include "emoface/geometry/landmarks.hpp"
#include "emoface/landmark_gen/emotion.hpp"

namespace emoface::pipeline {

enum class Split { kTrain, kVal, kTest };

struct DatasetEntry {
  std::string subject;
  landmark_gen::EmotionVector emotion;
  std::string clip;
  std::filesystem::path frame_dir;
  std::filesystem::path landmark_file;
  std::filesystem::path audio_file;
  std::size_t frames = 0;
  Split split = Split::kTrain;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;
  /// One line per skipped clip.
  std::vector<std::string> warnings;

  std::size_t size() const { return entries.size(); }
};

/// Scans `<subject>/<emotion>/<intensity>/<clip>/{frames/, landmarks.txt,
/// audio.af}`. Neutral clips use the intensity directory "none". Clips with
/// missing files or disagreeing frame counts are skipped with a warning
/// (also logged to stderr). An optional `splits.txt` of "<subject> <train|val|test>"
/// lines assigns splits; unlisted subjects are train. Throws Error when no
/// clip is valid.
DatasetIndex index_dataset(const std::filesystem::path& root);

/// Sorted frame files of a clip.
std::vector<std::filesystem::path> frame_files(const std::filesystem::path& frame_dir);

/// Loaded contents of one indexed clip.
struct ClipData {
  std::vector<geometry::LandmarkSet> landmarks;  // pixel coordinates
  audio::AudioFeatureSequence features;
};
ClipData load_clip(const DatasetEntry& entry);

std::string_view split_name(Split s);

}  // namespace emoface::pipeline
