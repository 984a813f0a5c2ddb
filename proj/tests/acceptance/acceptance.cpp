// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "emoface/adaptation/adaptation.hpp"
#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/delaunay.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/geometry/heatmap.hpp"
#include "emoface/landmark_gen/graph_conv.hpp"
#include "emoface/landmark_gen/losses.hpp"
#include "emoface/landmark_gen/trainer.hpp"
#include "emoface/metrics/fid.hpp"
#include "emoface/metrics/image_metrics.hpp"
#include "emoface/metrics/landmark_metrics.hpp"
#include "emoface/nn/ops.hpp"
#include "emoface/pipeline/animate.hpp"
#include "emoface/pipeline/dataset.hpp"
#include "emoface/pipeline/image_io.hpp"
#include "emoface/pipeline/synthetic.hpp"
#include "emoface/texture_gen/losses.hpp"
#include "emoface/texture_gen/trainer.hpp"
#include "oracles.hpp"

using namespace emoface;
using geometry::LandmarkSet;
using geometry::Point2;
using landmark_gen::Emotion;
using landmark_gen::EmotionVector;
using landmark_gen::Intensity;
using nn::Tensor;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1. graph convolution gradients ----

template <class S>
using Matrix = landmark_gen::Matrix<S>;

double relative_error(double a, double n) {
  const double scale = std::max({std::abs(a), std::abs(n), 1e-8});
  return std::abs(a - n) / scale;
}

Outcome graph_conv_gradients() {
  const auto t0 = Clock::now();
  const landmark_gen::GraphOperator g =
      landmark_gen::GraphOperator::from_graph(geometry::build_face_graph(geometry::canonical_template()));
  const int n = g.n;
  const std::array<std::pair<int, int>, 3> configs = {{{2, 4}, {5, 3}, {8, 8}}};
  double worst = 0.0;
  bool off_support_zero = true;
  std::size_t checked = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto [in, out] = configs[c];
    nn::Rng rng(100 + c);
    Matrix<double> f(n, in), w(in, out), omega(n, n), probe(n, out);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = rng.normal();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) omega(i, j) = g.mask(i, j) * rng.uniform(0.2, 2.0);
    auto value = [&](const Matrix<double>& om, const Matrix<double>& ww) {
      return landmark_gen::graph_conv_linear(om, g, f, ww).cwiseProduct(probe).sum();
    };
    const auto grads = landmark_gen::graph_conv_linear_backward(omega, g, f, w, probe);
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      Matrix<double> wp = w, wm = w;
      wp.data()[i] += eps;
      wm.data()[i] -= eps;
      worst = std::max(worst, relative_error(grads.d_w.data()[i], (value(omega, wp) - value(omega, wm)) / (2 * eps)));
      ++checked;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (g.mask(i, j) == 0.0) {
          off_support_zero = off_support_zero && grads.d_omega(i, j) == 0.0;
          continue;
        }
        Matrix<double> op = omega, om = omega;
        op(i, j) += eps;
        om(i, j) -= eps;
        worst = std::max(worst, relative_error(grads.d_omega(i, j), (value(op, w) - value(om, w)) / (2 * eps)));
        ++checked;
      }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-3 && off_support_zero && t < 60.0,
          fmt("max rel err %.2e over %zu entries (3 configs), off-support d_omega zero=%s, %.1fs", worst, checked,
              off_support_zero ? "yes" : "no", t)};
}

// ---- 2. closed-form losses ----

Outcome closed_form_losses() {
  const double tol = 1e-6;
  double worst = 0.0;
  auto note = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const nn::Var half = nn::constant(Tensor({4, 1}, 0.5f));
  const auto ls = landmark_gen::lsgan_losses(half, half);
  note(ls.discriminator.item(), 0.25);
  note(ls.generator.item(), 0.125);
  const auto ideal = landmark_gen::lsgan_losses(nn::constant(Tensor({4, 1}, 1.0f)), nn::constant(Tensor({4, 1}, 0.0f)));
  note(ideal.discriminator.item(), 0.0);
  note(landmark_gen::landmark_objective(0.2, 0.4, {}), 0.4);
  note(landmark_gen::landmark_objective(nn::constant(Tensor({1}, 0.2f)), nn::constant(Tensor({1}, 0.4f)), {}).item(),
       0.4);
  // Image objective with the default weights (rec 1, per 10, adv 1).
  note(texture_gen::image_objective(0.3, 0.02, -0.5, {}), 0.3 + 10 * 0.02 - 0.5);
  note(texture_gen::image_objective(nn::constant(Tensor({1}, 0.3f)), nn::constant(Tensor({1}, 0.02f)),
                                    nn::constant(Tensor({1}, -0.5f)), {})
           .item(),
       0.3 + 10 * 0.02 - 0.5);
  nn::Rng rng(2);
  const Tensor img = oracle::random_tensor(rng, {2, 3, 32, 32});
  const texture_gen::RandomPyramidExtractor ext;
  const nn::Var v = nn::constant(img);
  note(texture_gen::reconstruction_loss(v, v).item(), 0.0);
  note(texture_gen::perceptual_loss(ext, v, v).item(), 0.0);
  return {worst <= tol, fmt("max deviation %.2e (tol %.0e)", worst, tol)};
}

// ---- 3. geometry ----

Outcome geometry_oracles() {
  nn::Rng rng(3);
  int delaunay_bad = 0;
  std::string first_reason;
  for (int s = 0; s < 100; ++s) {
    const auto pts = oracle::random_points(rng, 3 + static_cast<int>(rng.below(48)));
    const auto tri = geometry::delaunay(pts);
    const auto check = oracle::check_delaunay(pts, tri);
    if (!check.ok) {
      if (delaunay_bad++ == 0) first_reason = check.reason;
    }
  }

  double procrustes = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = geometry::SimilarityTransform::from_params(rng.uniform(10.0, 400.0), rng.uniform(-3.0, 3.0),
                                                              rng.uniform(-100.0, 300.0), rng.uniform(-100.0, 300.0));
    const LandmarkSet placed = geometry::apply_transform(t, geometry::canonical_template(), false);
    const auto [aligned, est] = geometry::align_to_canonical(placed);
    procrustes = std::max(procrustes, geometry::max_abs_difference(aligned, geometry::canonical_template()));
    const LandmarkSet back = geometry::apply_transform(est.inverse(), aligned, false);
    procrustes = std::max(procrustes, geometry::max_abs_difference(back, placed) / t.scale);
  }

  // Heatmaps: unit peaks at integer vertex pixels, exact antisymmetry.
  bool heat_ok = true;
  const LandmarkSet base = geometry::apply_transform(geometry::SimilarityTransform::from_params(40, 0, 12, 12),
                                                     geometry::canonical_template(), false);
  std::array<Point2, geometry::kNumLandmarks> snapped{};
  for (int i = 0; i < geometry::kNumLandmarks; ++i) snapped[i] = {std::round(base[i].x), std::round(base[i].y)};
  const auto stack = geometry::render_heatmaps(std::span<const Point2>(snapped), 64, 64, 1.0);
  for (int i = 0; i < geometry::kNumLandmarks; ++i)
    heat_ok = heat_ok && stack.channels.at(i, static_cast<int>(snapped[i].y), static_cast<int>(snapped[i].x)) == 1.0f;
  const auto g = geometry::build_face_graph(base);
  LandmarkSet moved = base;
  for (int i = 48; i < 68; ++i) moved = moved.with_point(i, {base[i].x + rng.uniform(-3, 3), base[i].y + rng.uniform(-3, 3)});
  const auto gm = geometry::with_positions(g, moved.span());
  const Tensor ab = geometry::heatmap_difference(g, gm, 64, 64, 1.0);
  const Tensor ba = geometry::heatmap_difference(gm, g, 64, 64, 1.0);
  for (std::size_t k = 0; k < ab.numel(); ++k) heat_ok = heat_ok && ab[k] == -ba[k];
  const Tensor same = geometry::heatmap_difference(g, g, 64, 64, 1.0);
  for (float x : same.values()) heat_ok = heat_ok && x == 0.0f;

  const bool ok = delaunay_bad == 0 && procrustes <= 1e-6 && heat_ok;
  std::string d = fmt("delaunay %d/100 sets valid, procrustes round trip %.2e, heatmap invariants %s",
                      100 - delaunay_bad, procrustes, heat_ok ? "exact" : "violated");
  if (!first_reason.empty()) d += " (" + first_reason + ")";
  return {ok, d};
}

// ---- 4. warping ----

Outcome warp_oracles() {
  nn::Rng rng(4);
  const int c = 3, h = 16, w = 32;
  const Tensor x = oracle::random_tensor(rng, {c, h, w});
  const bool identity = texture_gen::warp(x, Tensor({2, h, w})).bitwise_equal(x);
  long compared = 0, mismatched = 0;
  for (const auto [dx, dy] : std::array<std::pair<int, int>, 6>{{{1, 0}, {0, 1}, {-2, 3}, {5, -4}, {-7, -1}, {0, 0}}}) {
    Tensor flow({2, h, w});
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        flow.at(0, i, j) = 2.0f * static_cast<float>(dx) / w;
        flow.at(1, i, j) = 2.0f * static_cast<float>(dy) / h;
      }
    const Tensor y = texture_gen::warp(x, flow);
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const int si = i + dy, sj = j + dx;
          if (si < 0 || si >= h || sj < 0 || sj >= w) continue;
          ++compared;
          mismatched += y.at(ch, i, j) != x.at(ch, si, sj);
        }
  }
  return {identity && mismatched == 0,
          fmt("zero flow %s, integer shifts %ld/%ld interior pixels exact", identity ? "exact" : "inexact",
              compared - mismatched, compared)};
}

// ---- 8. metrics ----

Outcome metric_oracles() {
  nn::Rng rng(8);
  const int n = 10000, d = 4;
  const double mu[d] = {1.0, -0.5, 0.75, 0.0};
  Eigen::MatrixXd a(n, d), b(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      a(i, k) = rng.normal();
      b(i, k) = rng.normal() + mu[k];
    }
  double mu2 = 0.0;
  for (double m : mu) mu2 += m * m;
  const double fid = metrics::frechet_distance(a, b);
  const double fid_err = std::abs(fid - mu2) / mu2;
  const double self = metrics::frechet_distance(a, a);

  const Tensor img = oracle::random_tensor(rng, {3, 32, 32});
  const bool psnr_ok = metrics::psnr(img, img) == metrics::kPsnrCap;
  const double ssim_self = metrics::ssim(img, img);
  std::vector<LandmarkSet> seq;
  for (int t = 0; t < 6; ++t) {
    geometry::LandmarkDelta delta{};
    for (auto& p : delta) p = {rng.normal(0.0, 0.01), rng.normal(0.0, 0.01)};
    seq.push_back(geometry::canonical_template() + delta);
  }
  const auto ld = metrics::landmark_distance(seq, seq, geometry::all_indices());
  const bool ok = fid_err < 0.05 && self < 1e-6 && psnr_ok && std::abs(ssim_self - 1.0) < 1e-12 && ld.ld == 0.0 &&
                  ld.lvd == 0.0;
  return {ok, fmt("FID %.4f vs |mu|^2 %.4f (%.2f%%), fid(X,X) %.1e, PSNR cap %s, SSIM(x,x)-1 %.1e, LD %g LVD %g", fid,
                  mu2, 100 * fid_err, self, psnr_ok ? "hit" : "missed", ssim_self - 1.0, ld.ld, ld.lvd)};
}

// ---- 5. landmark generator toy ----

constexpr long kLandmarkSteps = 1000;

std::vector<landmark_gen::LandmarkClip> toy_landmark_clips() {
  std::vector<landmark_gen::LandmarkClip> clips;
  const Emotion emotions[] = {Emotion::kHappy, Emotion::kAngry, Emotion::kSad, Emotion::kSurprise, Emotion::kFear,
                              Emotion::kDisgust};
  for (int c = 0; c < 10; ++c) {
    const auto id = pipeline::make_identity(1 + c % 2, 64);
    const EmotionVector e = c == 9 ? EmotionVector::neutral()
                                   : EmotionVector(emotions[c % 6], c < 6 ? Intensity::kHigh : Intensity::kLow);
    const auto synth = pipeline::make_clip(id, e, 40, 200 + c);
    landmark_gen::LandmarkClip clip;
    clip.windows = audio::window_features(synth.features);
    clip.neutral = id.neutral_canonical;
    clip.emotion = e;
    clip.targets = synth.canonical;
    clips.push_back(std::move(clip));
  }
  return clips;
}

double mean_vertex_loss(const landmark_gen::GLModel& model, const std::vector<landmark_gen::LandmarkClip>& clips,
                        bool zero_displacement = false) {
  double sum = 0.0;
  std::size_t frames = 0;
  for (const auto& clip : clips) {
    const auto pred = zero_displacement ? std::vector<LandmarkSet>(clip.targets.size(), clip.neutral)
                                        : landmark_gen::infer_landmark_sequence(model, clip.windows, clip.neutral,
                                                                                clip.emotion);
    for (std::size_t t = 0; t < pred.size(); ++t) sum += landmark_gen::loss_vertex(pred[t], clip.targets[t]);
    frames += pred.size();
  }
  return sum / static_cast<double>(frames);
}

Outcome landmark_toy(landmark_gen::GLModel& model) {
  const auto t0 = Clock::now();
  const auto clips = toy_landmark_clips();
  landmark_gen::GraphDiscriminator disc(1, model.topology_template());
  landmark_gen::LandmarkTrainer trainer(model, disc, {});
  nn::Rng rng(5);
  for (long s = 0; s < kLandmarkSteps; ++s) trainer.step(landmark_gen::sample_landmark_batch(clips, 4, 8, rng));
  const double loss = mean_vertex_loss(model, clips);
  const double baseline = mean_vertex_loss(model, clips, true);
  // Same audio and neutral face, different emotion.
  const auto& c0 = clips.front();
  const auto happy = landmark_gen::infer_landmark_sequence(model, c0.windows, c0.neutral, c0.emotion);
  const auto sad = landmark_gen::infer_landmark_sequence(model, c0.windows, c0.neutral,
                                                         EmotionVector(Emotion::kSad, Intensity::kHigh));
  double emo_change = 0.0;
  for (std::size_t t = 0; t < happy.size(); ++t)
    emo_change = std::max(emo_change, geometry::max_abs_difference(happy[t], sad[t]));
  const double t = seconds_since(t0);
  return {loss < 0.05 && t < 600.0,
          fmt("L_ver %.3e after %ld steps (zero-displacement baseline %.3e), emotion swap moves landmarks by %.3e, "
              "%.0fs",
              loss, kLandmarkSteps, baseline, emo_change, t)};
}

// ---- 6. texture generator toy ----

constexpr long kTextureMaxSteps = 5000;
constexpr long kTextureCheckEvery = 250;
constexpr double kTextureLr = 5e-4;
constexpr bool kTextureAdversarial = false;

std::vector<texture_gen::TextureSample> toy_texture_samples(const texture_gen::GTConfig& cfg) {
  std::vector<texture_gen::TextureSample> samples;
  const EmotionVector emotions[] = {{Emotion::kHappy, Intensity::kHigh},
                                    {Emotion::kSurprise, Intensity::kHigh},
                                    {Emotion::kSad, Intensity::kLow},
                                    EmotionVector::neutral()};
  for (int s = 0; s < 2; ++s) {
    const auto id = pipeline::make_identity(s + 1, cfg.resolution);
    const auto neutral_px = geometry::apply_transform(id.placement, id.neutral_canonical, false);
    const Tensor identity = pipeline::render_face(id, neutral_px);
    const auto g_in = geometry::build_face_graph(neutral_px);
    for (int k = 0; k < 4; ++k) {
      const auto clip = pipeline::make_clip(id, emotions[k], 20, 100 + s * 10 + k);
      const auto& lm = clip.pixel[static_cast<std::size_t>(7 + k)];
      texture_gen::TextureSample ts;
      ts.identity = identity;
      ts.emotion = emotions[k];
      ts.target = pipeline::render_face(id, lm);
      ts.heatmap = texture_gen::heatmap_input(cfg, g_in, geometry::with_positions(g_in, lm.span()));
      samples.push_back(std::move(ts));
    }
  }
  return samples;
}

Tensor frame_of(const Tensor& batch, int i) {
  const int c = batch.dim(1), h = batch.dim(2), w = batch.dim(3);
  Tensor out({c, h, w});
  const std::size_t n = out.numel();
  std::copy(batch.data() + i * n, batch.data() + (i + 1) * n, out.data());
  return out;
}

double mean_psnr(const texture_gen::GTModel& model, const std::vector<texture_gen::TextureSample>& samples) {
  std::vector<const texture_gen::TextureSample*> all;
  for (const auto& s : samples) all.push_back(&s);
  const auto b = texture_gen::make_texture_batch(all);
  nn::NoGradGuard guard;
  const Tensor out = model.forward(b.identity, b.heatmap, b.emotion).value();
  double p = 0.0;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) p += metrics::psnr(frame_of(out, i), frame_of(b.target, i));
  return p / static_cast<double>(samples.size());
}

Outcome texture_toy(texture_gen::GTModel& model, const texture_gen::PerceptualExtractor& ext) {
  const auto t0 = Clock::now();
  const auto samples = toy_texture_samples(model.config());
  texture_gen::FrameDiscriminator disc(8, 1);
  texture_gen::TextureTrainOptions opt;
  opt.generator.lr = kTextureLr;
  opt.discriminator.lr = kTextureLr;
  opt.adversarial = kTextureAdversarial;
  texture_gen::TextureTrainer trainer(model, disc, ext, opt);
  nn::Rng rng(5);
  double psnr = mean_psnr(model, samples);
  long steps = 0;
  while (steps < kTextureMaxSteps && psnr <= 25.0) {
    trainer.step(texture_gen::sample_texture_batch(samples, 4, rng));
    if (++steps % kTextureCheckEvery == 0) psnr = mean_psnr(model, samples);
  }
  psnr = mean_psnr(model, samples);

  // Emotion sensitivity: same identity and heatmap, different emotion.
  const auto& s = samples.front();
  const Tensor id = texture_gen::batched(s.identity), hm = texture_gen::batched(s.heatmap);
  nn::NoGradGuard guard;
  const Tensor a = model.forward(id, hm, landmark_gen::emotion_batch({s.emotion})).value();
  const Tensor b =
      model.forward(id, hm, landmark_gen::emotion_batch({EmotionVector(Emotion::kAngry, Intensity::kHigh)})).value();
  double change = 0.0;
  for (std::size_t k = 0; k < a.numel(); ++k) change += std::abs(a[k] - b[k]);
  change /= static_cast<double>(a.numel());
  const double t = seconds_since(t0);
  return {psnr > 25.0 && change > 1e-3 && t < 1800.0,
          fmt("training-set PSNR %.2f dB after %ld steps, emotion swap mean |dy| %.2e per pixel, %.0fs", psnr, steps,
              change, t)};
}

// ---- 7. one-shot adaptation ----

bool in_scope(const std::string& name) {
  for (const auto& prefix : texture_gen::GTModel::adaptation_scope())
    if (name.rfind(prefix, 0) == 0) return true;
  return false;
}

Outcome one_shot(const texture_gen::GTModel& model, const texture_gen::PerceptualExtractor& ext) {
  const auto id = pipeline::make_identity(42, model.config().resolution);
  const Tensor image = pipeline::render_face(id, geometry::apply_transform(id.placement, id.neutral_canonical, false));
  const auto t0 = Clock::now();
  const auto r = adaptation::one_shot_finetune(model, image, {}, ext);
  const double t = seconds_since(t0);
  const auto before = model.parameters().fingerprints(), after = r.model.parameters().fingerprints();
  int frozen_changed = 0;
  for (const auto& [name, hash] : before)
    if (!in_scope(name)) frozen_changed += after.at(name) != hash;
  const double drop = 1.0 - r.rec_after / r.rec_before;
  return {frozen_changed == 0 && r.steps <= 5 && drop >= 0.2 && t < 10.0,
          fmt("%d steps, L_rec %.4f -> %.4f (%.1f%% drop), out-of-scope tensors changed %d, %.2fs", r.steps,
              r.rec_before, r.rec_after, 100 * drop, frozen_changed, t)};
}

// ---- 9. end to end ----

Outcome end_to_end(const landmark_gen::GLModel& gl, const texture_gen::GTModel& gt) {
  const auto t0 = Clock::now();
  const auto id = pipeline::make_identity(7, gt.config().resolution);
  const EmotionVector e(Emotion::kHappy, Intensity::kHigh);
  const auto clip = pipeline::make_clip(id, e, 30, 17);
  pipeline::AnimateInputs in;
  in.identity_landmarks = geometry::apply_transform(id.placement, id.neutral_canonical, false);
  in.identity = pipeline::render_face(id, in.identity_landmarks);
  in.features = clip.features;
  in.emotion = e;
  pipeline::AnimateOptions opt;
  opt.seed = 1234;
  const auto root = std::filesystem::temp_directory_path() / "emoface_acceptance";
  std::filesystem::remove_all(root);
  const auto first = pipeline::animate_to_dir(gl, gt, in, opt, root / "a");
  const auto second = pipeline::animate_to_dir(gl, gt, in, opt, root / "b");
  bool identical = first.size() == second.size();
  for (std::size_t k = 0; identical && k < first.size(); ++k) {
    identical = pipeline::read_png(first[k]).bitwise_equal(pipeline::read_png(second[k]));
  }
  const std::size_t on_disk = pipeline::frame_files(root / "a").size();
  const double t = seconds_since(t0);
  std::filesystem::remove_all(root);
  return {first.size() == 30 && on_disk == 30 && identical && t < 120.0,
          fmt("%zu frames written (%zu on disk), reruns %s, %.1fs", first.size(), on_disk,
              identical ? "bitwise identical" : "differ", t)};
}

}  // namespace

int main() {
  report(1, "graph convolution gradients", graph_conv_gradients);
  report(2, "closed-form losses", closed_form_losses);
  report(3, "geometry oracles", geometry_oracles);
  report(4, "warp oracles", warp_oracles);
  report(8, "metric oracles", metric_oracles);

  landmark_gen::GLModel gl;
  report(5, "landmark generator toy overfit", [&] { return landmark_toy(gl); });
  texture_gen::GTModel gt;
  const texture_gen::RandomPyramidExtractor ext;
  report(6, "texture generator toy overfit", [&] { return texture_toy(gt, ext); });
  report(7, "one-shot adaptation", [&] { return one_shot(gt, ext); });
  report(9, "end-to-end animate smoke", [&] { return end_to_end(gl, gt); });
  return failures == 0 ? 0 : 1;
}
