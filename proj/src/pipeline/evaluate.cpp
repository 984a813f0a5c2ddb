#include "emoface/pipeline/evaluate.hpp"

#include "emoface/errors.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/metrics/fid.hpp"
#include "emoface/metrics/image_metrics.hpp"
#include "emoface/metrics/landmark_metrics.hpp"
#include "emoface/pipeline/dataset.hpp"
#include "emoface/pipeline/image_io.hpp"

namespace emoface::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<nn::Tensor> load_frames(const fs::path& dir) {
  std::vector<fs::path> files = frame_files(dir / "frames");
  if (files.empty()) files = frame_files(dir);
  std::vector<nn::Tensor> out;
  for (const auto& f : files)
    if (f.filename() != "identity.png") out.push_back(read_png(f));
  return out;
}

}  // namespace

metrics::MetricReport evaluate_dirs(const fs::path& pred, const fs::path& gt, const EvaluateOptions& options) {
  const auto pf = load_frames(pred), gf = load_frames(gt);
  if (pf.empty() || pf.size() != gf.size()) {
    throw ContractError("evaluate: " + std::to_string(pf.size()) + " predicted vs " + std::to_string(gf.size()) +
                        " reference frames");
  }
  const auto pl = geometry::read_landmark_file(pred / "landmarks.txt");
  const auto gl = geometry::read_landmark_file(gt / "landmarks.txt");

  metrics::MetricReport r;
  for (std::size_t t = 0; t < pf.size(); ++t) {
    r.psnr += metrics::psnr(pf[t], gf[t]);
    r.ssim += metrics::ssim(pf[t], gf[t]);
    r.cpbd += metrics::cpbd(pf[t]);
  }
  const double n = static_cast<double>(pf.size());
  r.psnr /= n;
  r.ssim /= n;
  r.cpbd /= n;
  const metrics::PixelStatsEmbedder embedder;
  r.fid = pf.size() >= 2 ? metrics::fid(pf, gf, embedder) : 0.0;

  const auto mouth = metrics::landmark_distance(pl, gl, geometry::mouth_indices());
  const auto face = metrics::landmark_distance(pl, gl, geometry::all_indices());
  r.m_ld = mouth.ld;
  r.m_lvd = mouth.lvd;
  r.f_ld = face.ld;
  r.f_lvd = face.lvd;

  metrics::ScoredVideo video;
  video.frames = pf;
  video.identity = fs::exists(pred / "identity.png") ? read_png(pred / "identity.png") : gf.front();
  video.emotion = options.emotion;
  if (!video.emotion) {
    fs::path clip = fs::absolute(gt).lexically_normal();
    if (clip.filename().empty()) clip = clip.parent_path();
    const auto e = landmark_gen::parse_emotion(clip.parent_path().parent_path().filename().string());
    if (e) video.emotion = *e;
  }
  if (fs::exists(gt / "audio.af")) video.features = audio::load_features(gt / "audio.af");
  const auto scored = metrics::scored_metrics({video}, options.scorers);
  r.csim = scored.csim;
  r.emo_acc = scored.emo_acc;
  r.sync_conf = scored.sync_conf;
  return r;
}

}  // namespace emoface::pipeline
