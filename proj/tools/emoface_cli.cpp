#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "emoface/adaptation/adaptation.hpp"
#include "emoface/adaptation/image_ops.hpp"
#include "emoface/errors.hpp"
#include "emoface/pipeline/animate.hpp"
#include "emoface/pipeline/checkpoint.hpp"
#include "emoface/pipeline/config.hpp"
#include "emoface/pipeline/dataset.hpp"
#include "emoface/pipeline/evaluate.hpp"
#include "emoface/pipeline/image_io.hpp"
#include "emoface/pipeline/synthetic.hpp"
#include "emoface/pipeline/training.hpp"

namespace fs = std::filesystem;
using namespace emoface;

namespace {

// Background used when none is supplied: the mean colour of the pixels the
// mask marks as background.
nn::Tensor fill_background(const nn::Tensor& image, const nn::Tensor& mask) {
  const std::size_t plane = mask.numel();
  double sum[3] = {0, 0, 0};
  double count = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    if (mask[i] != 0.0f) continue;
    for (std::size_t c = 0; c < 3; ++c) sum[c] += image[c * plane + i];
    count += 1;
  }
  nn::Tensor bg(image.shape());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i) bg[c * plane + i] = count > 0 ? static_cast<float>(sum[c] / count) : 0.0f;
  return bg;
}

audio::AudioFeatureSequence load_audio(const fs::path& p, std::uint64_t seed) {
  if (p.extension() == ".wav") return audio::SyntheticExtractor(seed).extract(p);
  return audio::load_features(p);
}

landmark_gen::EmotionVector parse_emotion_args(const std::string& emotion, const std::string& intensity) {
  const auto e = landmark_gen::parse_emotion(emotion);
  if (!e) throw ConfigError("unknown emotion '" + emotion + "'");
  if (*e == landmark_gen::Emotion::kNeutral) return landmark_gen::EmotionVector::neutral();
  const auto i = landmark_gen::parse_intensity(intensity);
  if (!i || *i == landmark_gen::Intensity::kNone) throw ConfigError("intensity must be high or low");
  return {*e, *i};
}

void print_landmark(long step, const landmark_gen::LandmarkStepReport& r) {
  if (step % 50 == 0) {
    std::printf("step %ld  ver %.3e  gan %.4f  disc %.4f\n", step, r.vertex, r.gan, r.discriminator);
    std::fflush(stdout);
  }
}

void print_texture(long step, const texture_gen::TextureStepReport& r) {
  if (step % 50 == 0) {
    std::printf("step %ld  rec %.4f  per %.4f  adv %.4f  disc %.4f\n", step, r.rec, r.per, r.adv, r.discriminator);
    std::fflush(stdout);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-conditioned talking-face synthesis"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value configuration file");
  app.fallthrough();

  std::string data, out, ckpt, identity, mask_path, background_path, landmarks_path, audio_path, gl_path, gt_path,
      pred, gt_dir, report;
  std::string emotion = "neutral", intensity = "none";
  long steps = -1;
  int jobs = 0, subjects = 2, frames = 30, resolution = 64;
  std::optional<std::uint64_t> seed;
  bool augment = false, adapt = false, no_blinks = false;

  auto* synth = app.add_subcommand("synth-data", "Write a procedural dataset");
  synth->add_option("--out", out)->required();
  synth->add_option("--subjects", subjects);
  synth->add_option("--frames", frames);
  synth->add_option("--resolution", resolution);
  synth->add_option("--seed", seed);

  auto* prep = app.add_subcommand("preprocess", "Align dataset landmarks to the canonical frame");
  prep->add_option("--data", data)->required();
  prep->add_option("--out", out)->required();

  auto* tl = app.add_subcommand("train-landmarks", "Train the landmark generator");
  tl->add_option("--data", data)->required();
  tl->add_option("--out", out)->required();
  tl->add_option("--steps", steps);
  tl->add_option("--resume", ckpt);

  auto* tt = app.add_subcommand("train-texture", "Train the texture generator");
  tt->add_option("--data", data)->required();
  tt->add_option("--out", out)->required();
  tt->add_option("--steps", steps);
  tt->add_option("--resume", ckpt);
  tt->add_flag("--augment", augment, "Colour-jitter training pairs");

  auto* ad = app.add_subcommand("adapt", "One-shot fine-tuning on a neutral image");
  ad->add_option("--ckpt", ckpt)->required();
  ad->add_option("--identity", identity)->required();
  ad->add_option("--mask", mask_path)->required();
  ad->add_option("--background", background_path);
  ad->add_option("--out", out)->required();

  auto* an = app.add_subcommand("animate", "Generate frames from audio features");
  an->add_option("--gl", gl_path)->required();
  an->add_option("--gt", gt_path)->required();
  an->add_option("--identity", identity)->required();
  an->add_option("--landmarks", landmarks_path, "Pixel landmarks of the identity image (first line is used)")->required();
  an->add_option("--audio,--audio-features", audio_path, ".af features or 16-bit PCM .wav")->required();
  an->add_option("--emotion", emotion);
  an->add_option("--intensity", intensity);
  an->add_option("--mask", mask_path);
  an->add_option("--background", background_path);
  an->add_option("--out", out)->required();
  an->add_option("--jobs", jobs);
  an->add_option("--seed", seed);
  an->add_flag("--adapt", adapt, "Fine-tune the texture model on the identity first");
  an->add_flag("--no-blinks", no_blinks);

  auto* ev = app.add_subcommand("evaluate", "Score generated frames against a reference clip");
  ev->add_option("--pred", pred)->required();
  ev->add_option("--gt", gt_dir)->required();
  ev->add_option("--report", report)->required();
  ev->add_option("--emotion", emotion);

  CLI11_PARSE(app, argc, argv);

  try {
    pipeline::PipelineConfig cfg = pipeline::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (jobs > 0) cfg.jobs = jobs;

    if (*synth) {
      pipeline::SyntheticDatasetOptions o;
      o.subjects = subjects;
      o.frames = static_cast<std::size_t>(frames);
      o.resolution = resolution;
      o.seed = cfg.seed;
      pipeline::write_synthetic_dataset(out, o);
      std::cout << "wrote synthetic dataset to " << out << "\n";
    } else if (*prep) {
      const auto s = pipeline::preprocess_dataset(data, out);
      std::cout << "aligned " << s.clips << " clips of " << s.subjects << " subjects\n";
    } else if (*tl) {
      const auto index = pipeline::index_dataset(data);
      const auto clips = pipeline::landmark_clips(index, pipeline::Split::kTrain);
      std::optional<pipeline::LandmarkCheckpoint> state;
      if (!ckpt.empty()) state.emplace(pipeline::load_landmark_checkpoint(ckpt));
      landmark_gen::GLModel model = state ? std::move(state->model) : landmark_gen::GLModel(pipeline::landmark_config(cfg));
      landmark_gen::GraphDiscriminator disc = state && state->discriminator ? std::move(*state->discriminator)
                                                                            : landmark_gen::GraphDiscriminator(cfg.seed + 1);
      pipeline::train_landmarks(model, disc, clips, cfg, steps >= 0 ? steps : cfg.steps_landmarks, print_landmark);
      pipeline::save_landmark_checkpoint(out, model, &disc);
      std::cout << "saved " << out << "\n";
    } else if (*tt) {
      const auto index = pipeline::index_dataset(data);
      const auto gt_cfg = pipeline::texture_config(cfg);
      pipeline::TextureSampleOptions so;
      so.augment = augment;
      so.seed = cfg.seed;
      const auto samples = pipeline::texture_samples(index, pipeline::Split::kTrain, gt_cfg, so);
      std::optional<pipeline::TextureCheckpoint> state;
      if (!ckpt.empty()) state.emplace(pipeline::load_texture_checkpoint(ckpt));
      texture_gen::GTModel model = state ? std::move(state->model) : texture_gen::GTModel(gt_cfg);
      texture_gen::FrameDiscriminator disc = state && state->discriminator
                                                 ? std::move(*state->discriminator)
                                                 : texture_gen::FrameDiscriminator(gt_cfg.base_width, cfg.seed + 1);
      const auto extractor = texture_gen::make_perceptual_extractor(cfg.perceptual);
      pipeline::train_texture(model, disc, samples, *extractor, cfg, steps >= 0 ? steps : cfg.steps_texture,
                              print_texture);
      pipeline::save_texture_checkpoint(out, model, &disc);
      std::cout << "saved " << out << "\n";
    } else if (*ad) {
      auto state = pipeline::load_texture_checkpoint(ckpt);
      const nn::Tensor image = pipeline::read_png(identity);
      const nn::Tensor mask = pipeline::read_mask_png(mask_path);
      const nn::Tensor bg = background_path.empty() ? fill_background(image, mask) : pipeline::read_png(background_path);
      const nn::Tensor input = adaptation::replace_background(image, bg, mask);
      const auto extractor = texture_gen::make_perceptual_extractor(cfg.perceptual);
      adaptation::AdaptationConfig ac;
      ac.max_steps = cfg.adapt_steps;
      ac.learning_rate = cfg.lr_adapt;
      ac.lambda_per = cfg.lambda_per;
      const auto result = adaptation::one_shot_finetune(state.model, input, ac, *extractor);
      std::printf("%d steps, L_rec %.4f -> %.4f\n", result.steps, result.rec_before, result.rec_after);
      pipeline::save_texture_checkpoint(out, result.model, state.discriminator ? &*state.discriminator : nullptr);
    } else if (*an) {
      const auto gl = pipeline::load_landmark_checkpoint(gl_path);
      const auto gt = pipeline::load_texture_checkpoint(gt_path);
      pipeline::AnimateInputs in;
      in.identity = pipeline::read_png(identity);
      const auto marks = geometry::read_landmark_file(landmarks_path);
      if (marks.empty()) throw FormatError("identity landmark file is empty", 0);
      in.identity_landmarks = marks.front();
      in.features = load_audio(audio_path, cfg.seed);
      in.emotion = parse_emotion_args(emotion, intensity);
      if (!mask_path.empty()) {
        in.mask = pipeline::read_mask_png(mask_path);
        in.background = background_path.empty() ? fill_background(in.identity, *in.mask)
                                                : pipeline::read_png(background_path);
      }
      pipeline::AnimateOptions o;
      o.jobs = cfg.jobs;
      o.seed = cfg.seed;
      o.blinks = !no_blinks;
      o.blink = cfg.blink;
      const auto extractor = texture_gen::make_perceptual_extractor(cfg.perceptual);
      if (adapt) {
        adaptation::AdaptationConfig ac;
        ac.max_steps = cfg.adapt_steps;
        ac.learning_rate = cfg.lr_adapt;
        ac.lambda_per = cfg.lambda_per;
        o.adapt = ac;
        o.extractor = extractor.get();
      }
      const auto paths = pipeline::animate_to_dir(gl.model, gt.model, in, o, out);
      pipeline::write_png(fs::path(out) / "identity.png", in.identity);
      std::cout << "wrote " << paths.size() << " frames to " << out << "\n";
    } else if (*ev) {
      pipeline::EvaluateOptions o;
      const metrics::PixelStatsEmbedder embedder;
      const metrics::TagEmotionClassifier classifier;
      const metrics::MotionEnergySyncScorer sync;
      if (cfg.scorer_identity == "stub") o.scorers.identity = &embedder;
      if (cfg.scorer_emotion == "stub") o.scorers.emotion = &classifier;
      if (cfg.scorer_sync == "stub") o.scorers.sync = &sync;
      for (const std::string* backend : {&cfg.scorer_identity, &cfg.scorer_emotion, &cfg.scorer_sync}) {
        if (!backend->empty() && *backend != "stub") {
          std::cerr << "warning: scorer backend '" << *backend << "' is not available; field omitted\n";
        }
      }
      if (emotion != "neutral" || app.get_subcommand("evaluate")->count("--emotion")) {
        const auto e = landmark_gen::parse_emotion(emotion);
        if (!e) throw ConfigError("unknown emotion '" + emotion + "'");
        o.emotion = *e;
      }
      const auto r = pipeline::evaluate_dirs(pred, gt_dir, o);
      metrics::write_report(report, r);
      std::cout << metrics::format_report(r);
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
