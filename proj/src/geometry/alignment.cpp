#include "emoface/geometry/alignment.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "emoface/errors.hpp"

namespace emoface::geometry {

Point2 SimilarityTransform::apply(Point2 p) const {
  const Eigen::Vector2d q = scale * (rotation * Eigen::Vector2d(p.x, p.y)) + translation;
  return {q.x(), q.y()};
}

Point2 SimilarityTransform::apply_vector(Point2 v) const {
  const Eigen::Vector2d q = scale * (rotation * Eigen::Vector2d(v.x, v.y));
  return {q.x(), q.y()};
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.scale = scale * other.scale;
  out.rotation = rotation * other.rotation;
  out.translation = scale * (rotation * other.translation) + translation;
  return out;
}

double SimilarityTransform::angle() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

SimilarityTransform SimilarityTransform::from_params(double s, double angle, double tx, double ty) {
  if (!(s > 0.0)) throw ContractError("similarity scale must be positive");
  SimilarityTransform t;
  t.scale = s;
  t.rotation << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  t.translation = {tx, ty};
  return t;
}

LandmarkSet apply_transform(const SimilarityTransform& t, const LandmarkSet& x, bool canonical) {
  std::array<Point2, kNumLandmarks> pts{};
  for (int i = 0; i < kNumLandmarks; ++i) pts[static_cast<std::size_t>(i)] = t.apply(x[i]);
  return transformed_unchecked(x, pts, canonical);
}

SimilarityTransform estimate_similarity(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size() || src.empty()) throw ContractError("estimate_similarity: point counts differ");
  const double n = static_cast<double>(src.size());
  Eigen::Vector2d mu_s = Eigen::Vector2d::Zero(), mu_d = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_s += Eigen::Vector2d(src[i].x, src[i].y);
    mu_d += Eigen::Vector2d(dst[i].x, dst[i].y);
  }
  mu_s /= n;
  mu_d /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector2d a = Eigen::Vector2d(src[i].x, src[i].y) - mu_s;
    const Eigen::Vector2d b = Eigen::Vector2d(dst[i].x, dst[i].y) - mu_d;
    cov += b * a.transpose();
    var_s += a.squaredNorm();
  }
  cov /= n;
  var_s /= n;
  double extent = 0.0;
  for (const auto& p : src) extent = std::max({extent, std::fabs(p.x), std::fabs(p.y)});
  if (var_s <= 1e-24 * std::max(1.0, extent * extent)) {
    throw DegenerateGeometryError("alignment: input points have zero spread");
  }

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(1, 1) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  t.scale = (svd.singularValues().asDiagonal() * d).trace() / var_s;
  if (!(t.scale > 0.0)) throw DegenerateGeometryError("alignment: destination points have zero spread");
  t.translation = mu_d - t.scale * (t.rotation * mu_s);
  return t;
}

namespace {

LandmarkSet build_template() {
  std::array<Point2, kNumLandmarks> p{};
  auto mirror = [](Point2 q) { return Point2{1.0 - q.x, q.y}; };
  for (int i = 0; i <= 16; ++i) {
    const double th = M_PI - i * M_PI / 16.0;
    p[static_cast<std::size_t>(i)] = {0.5 + 0.36 * std::cos(th), 0.42 + 0.45 * std::sin(th)};
  }
  for (int k = 0; k < 5; ++k) {
    p[static_cast<std::size_t>(17 + k)] = {0.22 + 0.055 * k, 0.30 - 0.03 * std::sin(M_PI * k / 4.0)};
  }
  for (int k = 0; k < 5; ++k) p[static_cast<std::size_t>(22 + k)] = mirror(p[static_cast<std::size_t>(21 - k)]);
  for (int k = 0; k < 4; ++k) p[static_cast<std::size_t>(27 + k)] = {0.5, 0.38 + 0.05 * k};
  const double nostril_y[5] = {0.58, 0.59, 0.60, 0.59, 0.58};
  for (int k = 0; k < 5; ++k) p[static_cast<std::size_t>(31 + k)] = {0.44 + 0.03 * k, nostril_y[k]};
  const double eye_angle[6] = {M_PI, 2 * M_PI / 3, M_PI / 3, 0.0, -M_PI / 3, -2 * M_PI / 3};
  for (int k = 0; k < 6; ++k) {
    p[static_cast<std::size_t>(36 + k)] = {0.33 + 0.07 * std::cos(eye_angle[k]), 0.40 - 0.03 * std::sin(eye_angle[k])};
  }
  const int right_eye_source[6] = {39, 38, 37, 36, 41, 40};
  for (int k = 0; k < 6; ++k) {
    p[static_cast<std::size_t>(42 + k)] = mirror(p[static_cast<std::size_t>(right_eye_source[k])]);
  }
  const Point2 outer[12] = {{0.38, 0.72}, {0.42, 0.695}, {0.46, 0.685}, {0.50, 0.69},  {0.54, 0.685}, {0.58, 0.695},
                            {0.62, 0.72}, {0.58, 0.75},  {0.54, 0.765}, {0.50, 0.77},  {0.46, 0.765}, {0.42, 0.75}};
  for (int k = 0; k < 12; ++k) p[static_cast<std::size_t>(48 + k)] = outer[k];
  const Point2 inner[8] = {{0.41, 0.72},  {0.46, 0.715}, {0.50, 0.715}, {0.54, 0.715},
                           {0.59, 0.72},  {0.54, 0.725}, {0.50, 0.725}, {0.46, 0.725}};
  for (int k = 0; k < 8; ++k) p[static_cast<std::size_t>(60 + k)] = inner[k];
  return LandmarkSet(p, true);
}

}  // namespace

const LandmarkSet& canonical_template() {
  static const LandmarkSet tmpl = build_template();
  return tmpl;
}

std::pair<LandmarkSet, SimilarityTransform> align_to_canonical(const LandmarkSet& landmarks) {
  return align_to_canonical(landmarks, canonical_template());
}

std::pair<LandmarkSet, SimilarityTransform> align_to_canonical(const LandmarkSet& landmarks,
                                                               const LandmarkSet& reference) {
  const SimilarityTransform t = estimate_similarity(landmarks.span(), reference.span());
  return {apply_transform(t, landmarks, true), t};
}

LandmarkSet retarget_displacements(const LandmarkDelta& delta, const LandmarkSet& target_neutral) {
  return retarget_displacements(delta, target_neutral, canonical_template());
}

LandmarkSet retarget_displacements(const LandmarkDelta& delta, const LandmarkSet& target_neutral,
                                   const LandmarkSet& reference) {
  const SimilarityTransform back = estimate_similarity(target_neutral.span(), reference.span()).inverse();
  LandmarkDelta mapped{};
  for (std::size_t i = 0; i < delta.size(); ++i) mapped[i] = back.apply_vector(delta[i]);
  return target_neutral + mapped;
}

LandmarkSet mean_template(std::span<const LandmarkSet> neutral_frames, int iterations) {
  if (neutral_frames.empty()) throw ContractError("mean_template: no frames");
  std::array<Point2, kNumLandmarks> mean = neutral_frames.front().points();
  for (int it = 0; it < std::max(1, iterations); ++it) {
    std::array<Point2, kNumLandmarks> acc{};
    for (const auto& f : neutral_frames) {
      const SimilarityTransform t = estimate_similarity(f.span(), mean);
      for (int i = 0; i < kNumLandmarks; ++i) {
        const Point2 q = t.apply(f[i]);
        acc[static_cast<std::size_t>(i)].x += q.x;
        acc[static_cast<std::size_t>(i)].y += q.y;
      }
    }
    const double inv = 1.0 / static_cast<double>(neutral_frames.size());
    for (auto& q : acc) q = {q.x * inv, q.y * inv};
    mean = acc;
  }
  double min_x = mean[0].x, max_x = mean[0].x, min_y = mean[0].y, max_y = mean[0].y;
  for (const auto& q : mean) {
    min_x = std::min(min_x, q.x);
    max_x = std::max(max_x, q.x);
    min_y = std::min(min_y, q.y);
    max_y = std::max(max_y, q.y);
  }
  const double extent = std::max(max_x - min_x, max_y - min_y);
  if (!(extent > 0.0)) throw DegenerateGeometryError("mean_template: frames have zero spread");
  const double s = 0.8 / extent;
  const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
  for (auto& q : mean) q = {0.5 + s * (q.x - cx), 0.5 + s * (q.y - cy)};
  return LandmarkSet(mean, true);
}

LandmarkSet load_template(const std::filesystem::path& path) {
  auto frames = read_landmark_file(path, true);
  if (frames.size() != 1) {
    throw FormatError("template file must hold exactly one frame, found " + std::to_string(frames.size()), 0);
  }
  return frames.front();
}

void save_template(const std::filesystem::path& path, const LandmarkSet& tmpl) {
  write_landmark_file(path, std::span<const LandmarkSet>(&tmpl, 1));
}

}  // namespace emoface::geometry
