#include "emoface/pipeline/training.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "emoface/adaptation/image_ops.hpp"
#include "emoface/errors.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/pipeline/image_io.hpp"

namespace emoface::pipeline {

namespace fs = std::filesystem;

std::map<std::string, SubjectReference> subject_references(const DatasetIndex& index) {
  std::map<std::string, SubjectReference> out;
  for (const auto& e : index.entries) {
    if (!e.emotion.is_neutral() || out.count(e.subject)) continue;
    const auto marks = geometry::read_landmark_file(e.landmark_file);
    const auto frames = frame_files(e.frame_dir);
    SubjectReference ref;
    ref.neutral_pixels = marks.front();
    std::tie(ref.neutral_canonical, ref.to_canonical) = geometry::align_to_canonical(ref.neutral_pixels);
    ref.neutral_image = frames.front();
    out.emplace(e.subject, std::move(ref));
  }
  for (const auto& e : index.entries) {
    if (!out.count(e.subject)) {
      std::cerr << "warning: subject " << e.subject << " has no neutral clip; its clips are unused\n";
    }
  }
  return out;
}

std::vector<landmark_gen::LandmarkClip> landmark_clips(const DatasetIndex& index, Split split) {
  const auto refs = subject_references(index);
  std::vector<landmark_gen::LandmarkClip> clips;
  for (const auto& e : index.entries) {
    if (e.split != split) continue;
    const auto it = refs.find(e.subject);
    if (it == refs.end()) continue;
    const ClipData data = load_clip(e);
    landmark_gen::LandmarkClip c;
    c.windows = audio::window_features(data.features);
    c.neutral = it->second.neutral_canonical;
    c.emotion = e.emotion;
    for (const auto& f : data.landmarks) c.targets.push_back(geometry::apply_transform(it->second.to_canonical, f, true));
    clips.push_back(std::move(c));
  }
  return clips;
}

PreprocessSummary preprocess_dataset(const fs::path& root, const fs::path& out) {
  const DatasetIndex index = index_dataset(root);
  const auto refs = subject_references(index);
  fs::create_directories(out);
  geometry::save_template(out / "template.txt", geometry::canonical_template());
  PreprocessSummary summary;
  summary.subjects = refs.size();
  for (const auto& e : index.entries) {
    const auto it = refs.find(e.subject);
    if (it == refs.end()) continue;
    const ClipData data = load_clip(e);
    std::vector<geometry::LandmarkSet> canon;
    for (const auto& f : data.landmarks) canon.push_back(geometry::apply_transform(it->second.to_canonical, f, true));
    const fs::path dir = out / fs::relative(e.landmark_file.parent_path(), root);
    fs::create_directories(dir);
    geometry::write_landmark_file(dir / "canonical.txt", canon);
    ++summary.clips;
  }
  return summary;
}

std::vector<texture_gen::TextureSample> texture_samples(const DatasetIndex& index, Split split,
                                                        const texture_gen::GTConfig& config,
                                                        const TextureSampleOptions& options) {
  const auto refs = subject_references(index);
  std::vector<texture_gen::TextureSample> samples;
  std::uint64_t aug_seed = options.seed;
  for (const auto& e : index.entries) {
    if (e.split != split) continue;
    const auto it = refs.find(e.subject);
    if (it == refs.end()) continue;
    const nn::Tensor identity = read_png(it->second.neutral_image);
    if (identity.dim(1) != config.resolution || identity.dim(2) != config.resolution) {
      throw ContractError("texture_samples: frames are " + std::to_string(identity.dim(2)) + " px, model expects " +
                          std::to_string(config.resolution));
    }
    const geometry::FaceGraph g_in = geometry::build_face_graph(it->second.neutral_pixels);
    const auto marks = geometry::read_landmark_file(e.landmark_file);
    const auto frames = frame_files(e.frame_dir);
    const std::size_t n = std::min(options.frames_per_clip, frames.size());
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = n == 1 ? 0 : k * (frames.size() - 1) / (n - 1);
      texture_gen::TextureSample s;
      s.identity = identity;
      s.target = read_png(frames[t]);
      s.emotion = e.emotion;
      s.heatmap = texture_gen::heatmap_input(config, g_in, geometry::with_positions(g_in, marks[t].span()));
      if (options.augment) {
        ++aug_seed;
        s.identity = adaptation::augment(s.identity, aug_seed);
        s.target = adaptation::augment(s.target, aug_seed);
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

landmark_gen::GLConfig landmark_config(const PipelineConfig& c) {
  landmark_gen::GLConfig g;
  g.lstm_hidden = c.gl_lstm_hidden;
  g.lstm_layers = c.gl_lstm_layers;
  g.seed = c.seed;
  return g;
}

texture_gen::GTConfig texture_config(const PipelineConfig& c) {
  texture_gen::GTConfig g;
  g.resolution = c.resolution;
  g.base_width = c.gt_base_width;
  g.heatmap_sigma = c.gt_heatmap_sigma;
  g.seed = c.seed;
  return g;
}

landmark_gen::LandmarkTrainOptions landmark_train_options(const PipelineConfig& c) {
  landmark_gen::LandmarkTrainOptions o;
  o.generator.lr = c.lr_landmarks;
  o.discriminator.lr = c.lr_landmarks;
  o.weights.vertex = c.lambda_ver;
  o.weights.gan = c.lambda_gan;
  o.adversarial = c.lambda_gan > 0.0;
  return o;
}

texture_gen::TextureTrainOptions texture_train_options(const PipelineConfig& c) {
  texture_gen::TextureTrainOptions o;
  o.generator.lr = c.lr_texture;
  o.discriminator.lr = c.lr_texture;
  o.weights = {c.lambda_rec, c.lambda_per, c.lambda_adv};
  o.adversarial = c.lambda_adv > 0.0;
  return o;
}

void train_landmarks(landmark_gen::GLModel& model, landmark_gen::GraphDiscriminator& disc,
                     std::span<const landmark_gen::LandmarkClip> clips, const PipelineConfig& config, long steps,
                     const LandmarkLog& log) {
  if (clips.empty()) throw ContractError("train_landmarks: no training clips");
  std::size_t length = static_cast<std::size_t>(config.sequence_length);
  for (const auto& c : clips) length = std::min(length, c.windows.frames());
  landmark_gen::LandmarkTrainer trainer(model, disc, landmark_train_options(config));
  nn::Rng rng(config.seed + 101);
  for (long s = 0; s < steps; ++s) {
    const auto batch =
        landmark_gen::sample_landmark_batch(clips, static_cast<std::size_t>(config.batch_landmarks), length, rng);
    const auto report = trainer.step(batch);
    if (log) log(s, report);
  }
}

void train_texture(texture_gen::GTModel& model, texture_gen::FrameDiscriminator& disc,
                   std::span<const texture_gen::TextureSample> samples, const texture_gen::PerceptualExtractor& extractor,
                   const PipelineConfig& config, long steps, const TextureLog& log) {
  if (samples.empty()) throw ContractError("train_texture: no training samples");
  texture_gen::TextureTrainer trainer(model, disc, extractor, texture_train_options(config));
  nn::Rng rng(config.seed + 202);
  for (long s = 0; s < steps; ++s) {
    const auto batch = texture_gen::sample_texture_batch(samples, static_cast<std::size_t>(config.batch_texture), rng);
    const auto report = trainer.step(batch);
    if (log) log(s, report);
  }
}

}  // namespace emoface::pipeline
