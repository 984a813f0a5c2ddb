#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/delaunay.hpp"
#include "emoface/metrics/fid.hpp"
#include "emoface/metrics/image_metrics.hpp"
#include "emoface/metrics/report.hpp"
#include "emoface/pipeline/animate.hpp"
#include "emoface/pipeline/checkpoint.hpp"
#include "emoface/pipeline/dataset.hpp"
#include "emoface/pipeline/evaluate.hpp"
#include "emoface/pipeline/image_io.hpp"
#include "emoface/pipeline/synthetic.hpp"

namespace py = pybind11;
using namespace emoface;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

nn::Tensor to_tensor(const FloatArray& a) {
  nn::Shape shape;
  for (py::ssize_t d = 0; d < a.ndim(); ++d) shape.push_back(static_cast<int>(a.shape(d)));
  return nn::Tensor(shape, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const nn::Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  FloatArray out(shape);
  std::copy(t.data(), t.data() + t.numel(), out.mutable_data());
  return out;
}

std::vector<geometry::Point2> to_points(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw ContractError("expected an [N, 2] array of points");
  std::vector<geometry::Point2> pts(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {a.at(i, 0), a.at(i, 1)};
  return pts;
}

DoubleArray landmarks_array(const geometry::LandmarkSet& s) {
  DoubleArray out({geometry::kNumLandmarks, 2});
  auto m = out.mutable_unchecked<2>();
  for (int i = 0; i < geometry::kNumLandmarks; ++i) {
    m(i, 0) = s[i].x;
    m(i, 1) = s[i].y;
  }
  return out;
}

Eigen::MatrixXd to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw ContractError("expected a 2-D array");
  Eigen::MatrixXd m(a.shape(0), a.shape(1));
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
  return m;
}

landmark_gen::EmotionVector emotion_vector(const std::string& emotion, const std::string& intensity) {
  const auto e = landmark_gen::parse_emotion(emotion);
  if (!e) throw ConfigError("unknown emotion '" + emotion + "'");
  if (*e == landmark_gen::Emotion::kNeutral) return landmark_gen::EmotionVector::neutral();
  const auto i = landmark_gen::parse_intensity(intensity);
  if (!i) throw ConfigError("unknown intensity '" + intensity + "'");
  return {*e, *i};
}

}  // namespace

PYBIND11_MODULE(_emoface, m) {
  m.doc() = "Emotional talking-face generation core";

  py::register_exception<Error>(m, "EmofaceError");

  m.def(
      "delaunay",
      [](const DoubleArray& points) {
        const auto tri = geometry::delaunay(to_points(points));
        py::array_t<int> out({static_cast<py::ssize_t>(tri.triangles.size()), py::ssize_t{3}});
        auto o = out.mutable_unchecked<2>();
        for (std::size_t k = 0; k < tri.triangles.size(); ++k)
          for (int c = 0; c < 3; ++c) o(k, c) = tri.triangles[k][c];
        return out;
      },
      py::arg("points"), "Counter-clockwise triangles of an [N, 2] point set, as an [M, 3] index array.");

  m.def("canonical_template", [] { return landmarks_array(geometry::canonical_template()); });

  m.def(
      "align_to_canonical",
      [](const DoubleArray& landmarks) {
        const auto pts = to_points(landmarks);
        if (pts.size() != geometry::kNumLandmarks) throw ContractError("expected 68 landmarks");
        std::array<geometry::Point2, geometry::kNumLandmarks> arr{};
        std::copy(pts.begin(), pts.end(), arr.begin());
        const auto [aligned, t] = geometry::align_to_canonical(geometry::LandmarkSet(arr));
        py::dict d;
        d["scale"] = t.scale;
        d["angle"] = t.angle();
        d["translation"] = py::make_tuple(t.translation.x(), t.translation.y());
        return py::make_tuple(landmarks_array(aligned), d);
      },
      py::arg("landmarks"), "Similarity-align 68 pixel landmarks onto the canonical template.");

  m.def(
      "psnr", [](const FloatArray& a, const FloatArray& b) { return metrics::psnr(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"), "PSNR of two [3, H, W] images in [-1, 1].");
  m.def(
      "ssim", [](const FloatArray& a, const FloatArray& b) { return metrics::ssim(to_tensor(a), to_tensor(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "cpbd", [](const FloatArray& a) { return metrics::cpbd(to_tensor(a)); }, py::arg("image"));
  m.def(
      "frechet_distance",
      [](const DoubleArray& a, const DoubleArray& b) { return metrics::frechet_distance(to_matrix(a), to_matrix(b)); },
      py::arg("a"), py::arg("b"), "Frechet distance between Gaussian fits of two [N, D] sample sets.");

  m.def(
      "read_png", [](const std::filesystem::path& p) { return to_array(pipeline::read_png(p)); }, py::arg("path"));
  m.def(
      "write_png", [](const std::filesystem::path& p, const FloatArray& img) { pipeline::write_png(p, to_tensor(img)); },
      py::arg("path"), py::arg("image"));

  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& root, int subjects, std::size_t frames, int resolution, std::uint64_t seed) {
        pipeline::SyntheticDatasetOptions o;
        o.subjects = subjects;
        o.frames = frames;
        o.resolution = resolution;
        o.seed = seed;
        pipeline::write_synthetic_dataset(root, o);
      },
      py::arg("root"), py::arg("subjects") = 2, py::arg("frames") = 30, py::arg("resolution") = 64,
      py::arg("seed") = 0);

  m.def(
      "index_dataset",
      [](const std::filesystem::path& root) {
        const auto idx = pipeline::index_dataset(root);
        py::list out;
        for (const auto& e : idx.entries) {
          py::dict d;
          d["subject"] = e.subject;
          d["emotion"] = std::string(landmark_gen::emotion_name(e.emotion.emotion()));
          d["intensity"] = std::string(landmark_gen::intensity_name(e.emotion.intensity()));
          d["clip"] = e.clip;
          d["frames"] = e.frames;
          d["split"] = std::string(pipeline::split_name(e.split));
          d["path"] = e.frame_dir.parent_path();
          out.append(d);
        }
        return out;
      },
      py::arg("root"));

  m.def(
      "animate",
      [](const std::filesystem::path& gl_ckpt, const std::filesystem::path& gt_ckpt,
         const std::filesystem::path& identity, const std::filesystem::path& landmarks,
         const std::filesystem::path& audio_features, const std::filesystem::path& out, const std::string& emotion,
         const std::string& intensity, std::uint64_t seed, int jobs) {
        const auto gl = pipeline::load_landmark_checkpoint(gl_ckpt);
        const auto gt = pipeline::load_texture_checkpoint(gt_ckpt);
        pipeline::AnimateInputs in;
        in.identity = pipeline::read_png(identity);
        const auto lm = geometry::read_landmark_file(landmarks);
        if (lm.empty()) throw FormatError("landmark file is empty", 0);
        in.identity_landmarks = lm.front();
        in.features = audio::load_features(audio_features);
        in.emotion = emotion_vector(emotion, intensity);
        pipeline::AnimateOptions o;
        o.seed = seed;
        o.jobs = jobs;
        py::gil_scoped_release release;
        return pipeline::animate_to_dir(gl.model, gt.model, in, o, out);
      },
      py::arg("gl_checkpoint"), py::arg("gt_checkpoint"), py::arg("identity"), py::arg("landmarks"),
      py::arg("audio"), py::arg("out"), py::arg("emotion") = "neutral", py::arg("intensity") = "none",
      py::arg("seed") = 0, py::arg("jobs") = 1, "Render frames into `out`; returns the frame paths.");

  m.def(
      "evaluate",
      [](const std::filesystem::path& pred, const std::filesystem::path& gt) {
        return metrics::format_report(pipeline::evaluate_dirs(pred, gt, {}));
      },
      py::arg("pred"), py::arg("gt"), "Metric report (JSON text) for a generated directory against a reference clip.");
}
