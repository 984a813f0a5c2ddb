#include "emoface/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "emoface/adaptation/image_ops.hpp"
#include "emoface/errors.hpp"
#include "emoface/metrics/scorers.hpp"
#include "emoface/nn/rng.hpp"
#include "emoface/pipeline/image_io.hpp"

namespace emoface::pipeline {

using geometry::LandmarkDelta;
using geometry::LandmarkSet;
using geometry::Point2;
using landmark_gen::Emotion;
using landmark_gen::EmotionVector;
using landmark_gen::Intensity;

namespace {

void shift(LandmarkDelta& d, std::initializer_list<int> idx, double dx, double dy) {
  for (int i : idx) {
    d[static_cast<std::size_t>(i)].x += dx;
    d[static_cast<std::size_t>(i)].y += dy;
  }
}

// Moves a left/right symmetric pair: `left` by (dx, dy), `right` by (-dx, dy).
void shift_pair(LandmarkDelta& d, std::initializer_list<int> left, std::initializer_list<int> right, double dx,
                double dy) {
  shift(d, left, dx, dy);
  shift(d, right, -dx, dy);
}

Color jitter(nn::Rng& rng, Color base, double amount) {
  Color c{};
  for (int k = 0; k < 3; ++k) {
    c[static_cast<std::size_t>(k)] =
        static_cast<float>(std::clamp(base[static_cast<std::size_t>(k)] + rng.uniform(-amount, amount), -1.0, 1.0));
  }
  return c;
}

bool inside(const std::vector<Point2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

double segment_distance(Point2 a, Point2 b, double x, double y) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((x - a.x) * vx + (y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = a.x + t * vx - x, dy = a.y + t * vy - y;
  return std::sqrt(dx * dx + dy * dy);
}

double polyline_distance(const LandmarkSet& p, int first, int last, double x, double y) {
  double d = 1e300;
  for (int i = first; i < last; ++i) d = std::min(d, segment_distance(p[i], p[i + 1], x, y));
  return d;
}

std::vector<Point2> ring(const LandmarkSet& p, int first, int last) {
  std::vector<Point2> out;
  for (int i = first; i <= last; ++i) out.push_back(p[i]);
  return out;
}

Point2 centroid(const std::vector<Point2>& pts) {
  Point2 c{};
  for (const auto& q : pts) {
    c.x += q.x;
    c.y += q.y;
  }
  return {c.x / static_cast<double>(pts.size()), c.y / static_cast<double>(pts.size())};
}

Color scaled(Color c, double f) {
  for (auto& v : c) v = static_cast<float>(std::clamp((v + 1.0) * f - 1.0, -1.0, 1.0));
  return c;
}

}  // namespace

SyntheticIdentity make_identity(std::uint64_t seed, int resolution) {
  if (resolution < 16) throw ContractError("make_identity: resolution must be at least 16");
  nn::Rng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  SyntheticIdentity id;
  id.resolution = resolution;

  // Shape variation about the template centre line.
  const LandmarkSet& tmpl = geometry::canonical_template();
  const double jaw_width = rng.uniform(0.92, 1.05);
  const double mouth_width = rng.uniform(0.9, 1.1);
  const double eye_drop = rng.uniform(-0.01, 0.01);
  const double nose_len = rng.uniform(-0.01, 0.01);
  auto pts = tmpl.points();
  for (int i = 0; i <= 16; ++i) pts[static_cast<std::size_t>(i)].x = 0.5 + (pts[static_cast<std::size_t>(i)].x - 0.5) * jaw_width;
  for (int i = 48; i <= 67; ++i) pts[static_cast<std::size_t>(i)].x = 0.5 + (pts[static_cast<std::size_t>(i)].x - 0.5) * mouth_width;
  for (int i = 36; i <= 47; ++i) pts[static_cast<std::size_t>(i)].y += eye_drop;
  for (int i = 31; i <= 35; ++i) pts[static_cast<std::size_t>(i)].y += nose_len;
  for (int i = 28; i <= 30; ++i) pts[static_cast<std::size_t>(i)].y += nose_len * (i - 27) / 3.0;
  id.neutral_canonical = LandmarkSet(pts, true);

  const double s = resolution * rng.uniform(0.9, 0.98);
  const double angle = rng.uniform(-0.04, 0.04);
  const double tx = resolution * (0.5 + rng.uniform(-0.02, 0.02)) - s * 0.5;
  const double ty = resolution * (0.52 + rng.uniform(-0.02, 0.02)) - s * 0.5;
  // Rotation about the face centre: fold the offset into the translation.
  geometry::SimilarityTransform place = geometry::SimilarityTransform::from_params(s, angle, 0.0, 0.0);
  const Point2 centre = place.apply({0.5, 0.5});
  place.translation = Eigen::Vector2d(tx + s * 0.5 - centre.x, ty + s * 0.5 - centre.y);
  id.placement = place;

  const double tone = rng.uniform(-0.4, 0.5);
  id.skin = jitter(rng, {static_cast<float>(tone + 0.25), static_cast<float>(tone), static_cast<float>(tone - 0.2)}, 0.08);
  id.background = jitter(rng, {0.0f, 0.0f, 0.0f}, 0.7);
  id.brow = jitter(rng, {-0.6f, -0.7f, -0.75f}, 0.15);
  id.lip = jitter(rng, {0.45f, -0.35f, -0.3f}, 0.12);
  id.iris = jitter(rng, {-0.5f, -0.4f, -0.3f}, 0.3);
  return id;
}

LandmarkDelta emotion_displacement(const EmotionVector& e) {
  LandmarkDelta d{};
  if (e.is_neutral()) return d;
  const double k = e.intensity() == Intensity::kLow ? 0.5 : 1.0;
  switch (e.emotion()) {
    case Emotion::kHappy:
      shift_pair(d, {48, 60}, {54, 64}, -0.02 * k, -0.02 * k);
      shift(d, {49, 50, 51, 52, 53}, 0.0, -0.005 * k);
      shift(d, {40, 41, 46, 47}, 0.0, -0.006 * k);
      break;
    case Emotion::kAngry:
      shift_pair(d, {21}, {22}, 0.01 * k, 0.025 * k);
      shift_pair(d, {17, 18, 19, 20}, {26, 25, 24, 23}, 0.0, 0.012 * k);
      shift_pair(d, {48, 60}, {54, 64}, 0.01 * k, 0.0);
      shift(d, {61, 62, 63}, 0.0, 0.003 * k);
      shift(d, {65, 66, 67}, 0.0, -0.003 * k);
      break;
    case Emotion::kSad:
      shift_pair(d, {20, 21}, {23, 22}, 0.0, -0.02 * k);
      shift_pair(d, {48, 60}, {54, 64}, 0.0, 0.02 * k);
      shift(d, {55, 56, 57, 58, 59}, 0.0, 0.005 * k);
      break;
    case Emotion::kSurprise:
      shift(d, {17, 18, 19, 20, 21, 22, 23, 24, 25, 26}, 0.0, -0.03 * k);
      shift(d, {37, 38, 43, 44}, 0.0, -0.008 * k);
      shift(d, {55, 56, 57, 58, 59, 65, 66, 67}, 0.0, 0.03 * k);
      for (int i = 5; i <= 11; ++i) shift(d, {i}, 0.0, 0.03 * k * (1.0 - std::abs(i - 8) / 4.0));
      break;
    case Emotion::kFear:
      shift_pair(d, {17, 18, 19, 20, 21}, {26, 25, 24, 23, 22}, 0.01 * k, -0.02 * k);
      shift(d, {37, 38, 43, 44}, 0.0, -0.006 * k);
      shift_pair(d, {48, 60}, {54, 64}, -0.02 * k, 0.0);
      shift(d, {55, 56, 57, 58, 59, 65, 66, 67}, 0.0, 0.015 * k);
      break;
    case Emotion::kDisgust:
      shift(d, {49, 50, 51, 52, 53, 61, 62, 63}, 0.0, -0.012 * k);
      shift(d, {31, 32, 33, 34, 35}, 0.0, -0.008 * k);
      shift_pair(d, {21}, {22}, 0.0, 0.01 * k);
      shift_pair(d, {48, 60}, {54, 64}, 0.0, 0.005 * k);
      break;
    case Emotion::kNeutral:
      break;
  }
  return d;
}

LandmarkDelta speech_displacement(double openness) {
  const double o = std::clamp(openness, 0.0, 1.0);
  LandmarkDelta d{};
  shift(d, {55, 56, 57, 58, 59}, 0.0, 0.04 * o);
  shift(d, {65, 66, 67}, 0.0, 0.035 * o);
  for (int i = 6; i <= 10; ++i) shift(d, {i}, 0.0, 0.025 * o * (1.0 - std::abs(i - 8) / 3.0));
  shift_pair(d, {48, 60}, {54, 64}, 0.005 * o, 0.0);
  return d;
}

std::vector<double> synthetic_envelope(std::size_t frames, std::uint64_t seed) {
  nn::Rng rng(seed ^ 0xA5A5A5A5ULL);
  std::vector<double> env(frames, 0.0);
  double t = rng.uniform(0.0, 4.0);
  while (t < static_cast<double>(frames)) {
    const double width = rng.uniform(3.0, 7.0);
    const double peak = rng.uniform(0.5, 1.0);
    for (std::size_t f = 0; f < frames; ++f) {
      const double u = (static_cast<double>(f) - t) / width;
      if (u >= 0.0 && u <= 1.0) env[f] = std::max(env[f], peak * std::sin(M_PI * u));
    }
    t += width + rng.uniform(0.0, 4.0);
  }
  return env;
}

nn::Tensor render_face(const SyntheticIdentity& id, const LandmarkSet& p, const EmotionVector* emotion_tag) {
  const int r = id.resolution;
  const double scale = id.placement.scale;

  std::vector<Point2> face = ring(p, 0, 16);
  {
    // Forehead: half ellipse from the right jaw end back to the left one.
    const Point2 a = p[0], b = p[16];
    const double cx = 0.5 * (a.x + b.x), cy = 0.5 * (a.y + b.y);
    const double rx = 0.5 * std::hypot(b.x - a.x, b.y - a.y);
    double brow_top = cy;
    for (int i = 17; i <= 26; ++i) brow_top = std::min(brow_top, p[i].y);
    const double ry = cy - brow_top + 0.08 * scale;
    const double ang = std::atan2(b.y - a.y, b.x - a.x);
    for (int k = 1; k < 16; ++k) {
      const double th = M_PI * k / 16.0;
      const double ux = rx * std::cos(th), uy = -ry * std::sin(th);
      face.push_back({cx + ux * std::cos(ang) - uy * std::sin(ang), cy + ux * std::sin(ang) + uy * std::cos(ang)});
    }
  }
  const Point2 face_c = centroid(face);
  const std::vector<Point2> outer_lip = ring(p, 48, 59), inner_lip = ring(p, 60, 67);
  const std::vector<Point2> eye_l = ring(p, 36, 41), eye_r = ring(p, 42, 47);
  const Point2 iris_l = centroid(eye_l), iris_r = centroid(eye_r);
  const double iris_rad = 0.022 * scale;
  const double brow_w = 0.014 * scale, nose_w = 0.008 * scale;
  const Color sclera{0.85f, 0.85f, 0.8f}, mouth{-0.7f, -0.85f, -0.85f};
  const Color nose = scaled(id.skin, 0.8);
  const int tag = emotion_tag ? metrics::emotion_tag_size(r) : 0;
  const Color tag_color = emotion_tag ? metrics::emotion_tag_color(emotion_tag->emotion()) : Color{};

  constexpr int kSub = 3;
  nn::Tensor out({3, r, r});
  for (int y = 0; y < r; ++y)
    for (int x = 0; x < r; ++x) {
      if (x < tag && y < tag) {
        for (int k = 0; k < 3; ++k) out.at(k, y, x) = tag_color[static_cast<std::size_t>(k)];
        continue;
      }
      double acc[3] = {0.0, 0.0, 0.0};
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          // Pixel (i, j) covers [j - 0.5, j + 0.5] x [i - 0.5, i + 0.5].
          const double px = x - 0.5 + (sx + 0.5) / kSub, py = y - 0.5 + (sy + 0.5) / kSub;
          Color c;
          if (inside(inner_lip, px, py)) {
            c = mouth;
          } else if (inside(outer_lip, px, py)) {
            c = id.lip;
          } else if (inside(eye_l, px, py) || inside(eye_r, px, py)) {
            const bool on_iris = std::hypot(px - iris_l.x, py - iris_l.y) < iris_rad ||
                                 std::hypot(px - iris_r.x, py - iris_r.y) < iris_rad;
            c = on_iris ? id.iris : sclera;
          } else if (polyline_distance(p, 17, 21, px, py) < brow_w || polyline_distance(p, 22, 26, px, py) < brow_w) {
            c = id.brow;
          } else if (polyline_distance(p, 27, 30, px, py) < nose_w || polyline_distance(p, 31, 35, px, py) < nose_w) {
            c = nose;
          } else if (inside(face, px, py)) {
            const double dx = (px - face_c.x) / scale, dy = (py - face_c.y) / scale;
            c = scaled(id.skin, 1.0 - 0.6 * (dx * dx + dy * dy));
          } else {
            c = scaled(id.background, 1.0 - 0.25 * py / r);
          }
          for (int k = 0; k < 3; ++k) acc[k] += c[static_cast<std::size_t>(k)];
        }
      for (int k = 0; k < 3; ++k) out.at(k, y, x) = static_cast<float>(acc[k] / (kSub * kSub));
    }
  return out;
}

SyntheticClip make_clip(const SyntheticIdentity& id, const EmotionVector& emotion, std::size_t frames,
                        std::uint64_t seed) {
  if (frames == 0) throw ContractError("make_clip: need at least one frame");
  SyntheticClip clip;
  clip.emotion = emotion;
  clip.envelope = synthetic_envelope(frames, seed);
  clip.features = audio::SyntheticExtractor(seed).from_envelope(clip.envelope);
  const LandmarkDelta expr = emotion_displacement(emotion);
  for (std::size_t t = 0; t < frames; ++t) {
    LandmarkDelta d = speech_displacement(clip.envelope[t]);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i].x += expr[i].x;
      d[i].y += expr[i].y;
    }
    const LandmarkSet canon = id.neutral_canonical + d;
    clip.canonical.push_back(canon);
    clip.pixel.push_back(geometry::apply_transform(id.placement, canon, false));
  }
  return clip;
}

void write_clip(const std::filesystem::path& clip_dir, const SyntheticIdentity& id, const SyntheticClip& clip,
                bool tag_emotion) {
  std::filesystem::create_directories(clip_dir / "frames");
  for (std::size_t t = 0; t < clip.pixel.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.png", t);
    write_png(clip_dir / "frames" / name, render_face(id, clip.pixel[t], tag_emotion ? &clip.emotion : nullptr));
  }
  geometry::write_landmark_file(clip_dir / "landmarks.txt", clip.pixel);
  audio::save_features(clip_dir / "audio.af", clip.features);
}

void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticDatasetOptions& o) {
  if (o.subjects < 1 || o.clips_per_condition < 1) throw ContractError("synthetic dataset: empty configuration");
  std::uint64_t clip_seed = o.seed * 1000003ULL + 1;
  for (int s = 0; s < o.subjects; ++s) {
    char subject[32];
    std::snprintf(subject, sizeof subject, "S%03d", s);
    const SyntheticIdentity id = make_identity(o.seed * 7919ULL + static_cast<std::uint64_t>(s), o.resolution);
    std::vector<EmotionVector> conditions = {EmotionVector::neutral()};
    for (Emotion e : o.emotions) {
      conditions.emplace_back(e, Intensity::kHigh);
      conditions.emplace_back(e, Intensity::kLow);
    }
    for (const auto& cond : conditions) {
      for (int c = 0; c < o.clips_per_condition; ++c) {
        char clip_name[16];
        std::snprintf(clip_name, sizeof clip_name, "%03d", c);
        const auto dir = root / subject / std::string(landmark_gen::emotion_name(cond.emotion())) /
                         std::string(landmark_gen::intensity_name(cond.intensity())) / clip_name;
        write_clip(dir, id, make_clip(id, cond, o.frames, clip_seed++));
      }
    }
    // Foreground mask of the neutral pose, for `adapt --mask`.
    const auto neutral_px = geometry::apply_transform(id.placement, id.neutral_canonical, false);
    write_mask_png(root / subject / "mask.png", adaptation::heuristic_face_mask(o.resolution, o.resolution, &neutral_px));
  }
}

}  // namespace emoface::pipeline
