#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emoface::geometry {

inline constexpr int kNumLandmarks = 68;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Per-vertex displacement between two landmark sets.
using LandmarkDelta = std::array<Point2, kNumLandmarks>;

/// The 68 iBUG-ordered 2-D facial landmarks of one frame. Coordinates are
/// pixels of a reference image, or the unit square when `canonical()`.
///
/// Construction validates the invariants (finite; canonical sets inside
/// [0,1]^2). Arithmetic with LandmarkDelta is unchecked so that
/// `base + delta` is always exact.
class LandmarkSet {
 public:
  LandmarkSet() = default;
  explicit LandmarkSet(const std::array<Point2, kNumLandmarks>& points, bool canonical = false);

  /// From interleaved x0,y0,...,x67,y67.
  static LandmarkSet from_flat(std::span<const double> xy, bool canonical = false);

  const Point2& operator[](int i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::array<Point2, kNumLandmarks>& points() const { return points_; }
  std::span<const Point2> span() const { return points_; }
  bool canonical() const { return canonical_; }

  std::array<double, 2 * kNumLandmarks> flat() const;

  /// Copy with vertex `i` replaced (unchecked).
  LandmarkSet with_point(int i, Point2 p) const;
  /// Same coordinates with a different frame flag (validated).
  LandmarkSet as_canonical(bool canonical) const { return LandmarkSet(points_, canonical); }

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  struct Unchecked {};
  LandmarkSet(const std::array<Point2, kNumLandmarks>& points, bool canonical, Unchecked)
      : points_(points), canonical_(canonical) {}

  friend LandmarkSet operator+(const LandmarkSet& base, const LandmarkDelta& delta);
  friend LandmarkSet transformed_unchecked(const LandmarkSet&, const std::array<Point2, kNumLandmarks>&, bool);

  std::array<Point2, kNumLandmarks> points_{};
  bool canonical_ = false;
};

LandmarkDelta operator-(const LandmarkSet& a, const LandmarkSet& b);
LandmarkSet operator+(const LandmarkSet& base, const LandmarkDelta& delta);
/// Builds a set from computed coordinates, checking finiteness only.
LandmarkSet transformed_unchecked(const LandmarkSet& like, const std::array<Point2, kNumLandmarks>& points,
                                  bool canonical);

LandmarkDelta zero_delta();
double max_abs_difference(const LandmarkSet& a, const LandmarkSet& b);

/// Plain-text landmark sequence: one frame per line, 136 comma-separated
/// decimals x0,y0,...,x67,y67. Throws FormatError with the line number.
std::vector<LandmarkSet> read_landmark_file(const std::filesystem::path& path, bool canonical = false);
void write_landmark_file(const std::filesystem::path& path, std::span<const LandmarkSet> frames);

/// Line-level codec shared by the file functions.
LandmarkSet parse_landmark_line(const std::string& line, bool canonical, std::size_t line_number);
std::string format_landmark_line(const LandmarkSet& frame);

}  // namespace emoface::geometry
