#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "emoface/geometry/landmarks.hpp"

namespace emoface::geometry {

/// p -> scale * rotation * p + translation, with det(rotation) = +1.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Point2 apply(Point2 p) const;
  /// Linear part only, for displacements.
  Point2 apply_vector(Point2 v) const;
  SimilarityTransform inverse() const;
  /// (*this)(other(p)).
  SimilarityTransform compose(const SimilarityTransform& other) const;
  double angle() const;

  static SimilarityTransform from_params(double scale, double angle, double tx, double ty);
};

/// Applies t to every point; the result is flagged `canonical` but only
/// checked for finiteness.
LandmarkSet apply_transform(const SimilarityTransform& t, const LandmarkSet& x, bool canonical);

/// Least-squares similarity taking `src` onto `dst` (reflections excluded).
/// Throws DegenerateGeometryError when `src` has zero spread.
SimilarityTransform estimate_similarity(std::span<const Point2> src, std::span<const Point2> dst);

/// Symmetric synthetic mean face in the unit square.
const LandmarkSet& canonical_template();

/// Maps `landmarks` onto `reference` (default: canonical_template()).
std::pair<LandmarkSet, SimilarityTransform> align_to_canonical(const LandmarkSet& landmarks);
std::pair<LandmarkSet, SimilarityTransform> align_to_canonical(const LandmarkSet& landmarks,
                                                               const LandmarkSet& reference);

/// target_neutral + inverse-linear(alignment of target_neutral)(delta).
LandmarkSet retarget_displacements(const LandmarkDelta& delta, const LandmarkSet& target_neutral);
LandmarkSet retarget_displacements(const LandmarkDelta& delta, const LandmarkSet& target_neutral,
                                   const LandmarkSet& reference);

/// Generalized Procrustes mean of neutral frames, fitted back into the unit
/// square (centered, largest extent 0.8).
LandmarkSet mean_template(std::span<const LandmarkSet> neutral_frames, int iterations = 10);

/// Template files use the landmark-file format with a single line.
LandmarkSet load_template(const std::filesystem::path& path);
void save_template(const std::filesystem::path& path, const LandmarkSet& tmpl);

}  // namespace emoface::geometry
