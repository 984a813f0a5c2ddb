#include "emoface/pipeline/animate.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "emoface/adaptation/image_ops.hpp"
#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/pipeline/image_io.hpp"

namespace emoface::pipeline {

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Runs body(i) for i in [0, n) on `jobs` threads; the first exception wins.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string frame_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu.png", t);
  return buf;
}

AnimationResult animate(const landmark_gen::GLModel& gl, const texture_gen::GTModel& gt, const AnimateInputs& in,
                        const AnimateOptions& options) {
  const int r = gt.config().resolution;
  stage("input", [&] {
    if (in.identity.shape() != nn::Shape{3, r, r}) {
      throw ContractError("identity image must be [3, " + std::to_string(r) + ", " + std::to_string(r) + "], got " +
                          nn::shape_string(in.identity.shape()));
    }
    if (in.mask.has_value() != in.background.has_value()) {
      throw ContractError("mask and background must be given together");
    }
    if (in.features.frames() == 0) throw ContractError("no audio frames");
    return 0;
  });

  const nn::Tensor identity = stage("background", [&] {
    return in.mask ? adaptation::replace_background(in.identity, *in.background, *in.mask) : in.identity;
  });

  std::optional<texture_gen::GTModel> tuned;
  if (options.adapt) {
    stage("adapt", [&] {
      if (!options.extractor) throw ConfigError("adaptation needs a perceptual extractor");
      tuned.emplace(adaptation::one_shot_finetune(gt, identity, *options.adapt, *options.extractor).model);
      return 0;
    });
  }
  const texture_gen::GTModel& model = tuned ? *tuned : gt;

  const auto reference = gl.topology_template();
  const geometry::LandmarkSet neutral_canonical =
      stage("landmarks", [&] { return geometry::align_to_canonical(in.identity_landmarks, reference).first; });
  std::vector<geometry::LandmarkSet> canonical = stage("landmarks", [&] {
    return landmark_gen::infer_landmark_sequence(gl, audio::window_features(in.features), neutral_canonical,
                                                 in.emotion);
  });
  if (options.blinks) {
    canonical = stage("blinks", [&] { return geometry::add_blinks(canonical, options.blink, options.seed); });
  }

  AnimationResult result;
  result.landmarks = stage("retarget", [&] {
    std::vector<geometry::LandmarkSet> px;
    px.reserve(canonical.size());
    for (const auto& c : canonical) {
      px.push_back(geometry::retarget_displacements(c - neutral_canonical, in.identity_landmarks, reference));
    }
    return px;
  });

  result.frames.assign(result.landmarks.size(), nn::Tensor());
  stage("texture", [&] {
    const geometry::FaceGraph g_in = geometry::build_face_graph(in.identity_landmarks);
    parallel_for(result.landmarks.size(), options.jobs, [&](std::size_t t) {
      const auto g_out = geometry::with_positions(g_in, result.landmarks[t].span());
      result.frames[t] = texture_gen::generate_frame(model, identity, g_in, g_out, in.emotion);
    });
    return 0;
  });

  if (in.mask) {
    stage("restore", [&] {
      for (auto& f : result.frames) f = adaptation::restore_background(f, in.identity, *in.mask);
      return 0;
    });
  }
  return result;
}

std::vector<std::filesystem::path> animate_to_dir(const landmark_gen::GLModel& gl, const texture_gen::GTModel& gt,
                                                  const AnimateInputs& inputs, const AnimateOptions& options,
                                                  const std::filesystem::path& out_dir) {
  const AnimationResult result = animate(gl, gt, inputs, options);
  return stage("write", [&] {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> paths(result.frames.size());
    parallel_for(result.frames.size(), options.jobs, [&](std::size_t t) {
      paths[t] = out_dir / frame_name(t);
      write_png(paths[t], result.frames[t]);
    });
    geometry::write_landmark_file(out_dir / "landmarks.txt", result.landmarks);
    return paths;
  });
}

}  // namespace emoface::pipeline
