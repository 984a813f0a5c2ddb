#include "emoface/pipeline/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "emoface/errors.hpp"

namespace emoface::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> sorted_dirs(const fs::path& p) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, Split> read_splits(const fs::path& root) {
  std::map<std::string, Split> out;
  std::ifstream in(root / "splits.txt");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ss(line);
    std::string subject, split;
    if (!(ss >> subject)) continue;
    if (!(ss >> split)) throw FormatError("splits.txt: missing split", n);
    if (split == "train") out[subject] = Split::kTrain;
    else if (split == "val") out[subject] = Split::kVal;
    else if (split == "test") out[subject] = Split::kTest;
    else throw FormatError("splits.txt: unknown split '" + split + "'", n);
  }
  return out;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
  return n;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::vector<fs::path> frame_files(const fs::path& frame_dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(frame_dir)) return out;
  for (const auto& e : fs::directory_iterator(frame_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

DatasetIndex index_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("dataset root is not a directory: " + root.string());
  DatasetIndex index;
  const auto splits = read_splits(root);
  auto skip = [&](const fs::path& clip, const std::string& why) {
    index.warnings.push_back(clip.string() + ": " + why);
    std::cerr << "warning: skipping " << clip.string() << ": " << why << "\n";
  };
  for (const auto& subject : sorted_dirs(root))
    for (const auto& emo_dir : sorted_dirs(subject))
      for (const auto& int_dir : sorted_dirs(emo_dir))
        for (const auto& clip : sorted_dirs(int_dir)) {
          const auto emotion = landmark_gen::parse_emotion(emo_dir.filename().string());
          const auto intensity = landmark_gen::parse_intensity(int_dir.filename().string());
          if (!emotion || !intensity) {
            skip(clip, "unknown emotion or intensity directory");
            continue;
          }
          DatasetEntry e;
          try {
            e.emotion = landmark_gen::EmotionVector(*emotion, *intensity);
          } catch (const ContractError& err) {
            skip(clip, err.what());
            continue;
          }
          e.subject = subject.filename().string();
          e.clip = clip.filename().string();
          e.frame_dir = clip / "frames";
          e.landmark_file = clip / "landmarks.txt";
          e.audio_file = clip / "audio.af";
          if (!fs::is_directory(e.frame_dir) || !fs::is_regular_file(e.landmark_file) ||
              !fs::is_regular_file(e.audio_file)) {
            skip(clip, "missing frames/, landmarks.txt or audio.af");
            continue;
          }
          const std::size_t images = frame_files(e.frame_dir).size();
          const std::size_t marks = count_lines(e.landmark_file);
          std::size_t feats = 0;
          try {
            feats = audio::load_features(e.audio_file).frames();
          } catch (const Error& err) {
            skip(clip, err.what());
            continue;
          }
          if (images == 0 || images != marks || images != feats) {
            skip(clip, "frame counts disagree: " + std::to_string(images) + " images, " + std::to_string(marks) +
                           " landmark frames, " + std::to_string(feats) + " audio frames");
            continue;
          }
          e.frames = images;
          if (const auto it = splits.find(e.subject); it != splits.end()) e.split = it->second;
          index.entries.push_back(std::move(e));
        }
  if (index.entries.empty()) throw Error("dataset: no valid clips under " + root.string());
  return index;
}

ClipData load_clip(const DatasetEntry& entry) {
  ClipData d;
  d.landmarks = geometry::read_landmark_file(entry.landmark_file);
  d.features = audio::load_features(entry.audio_file);
  return d;
}

}  // namespace emoface::pipeline
