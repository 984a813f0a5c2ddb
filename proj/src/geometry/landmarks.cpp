#include "emoface/geometry/landmarks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "emoface/errors.hpp"

namespace emoface::geometry {

namespace {

void check_points(const std::array<Point2, kNumLandmarks>& pts, bool canonical) {
  for (int i = 0; i < kNumLandmarks; ++i) {
    const Point2& p = pts[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ContractError("landmark " + std::to_string(i) + " is not finite");
    }
    if (canonical && (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0)) {
      throw ContractError("canonical landmark " + std::to_string(i) + " lies outside the unit square");
    }
  }
}

}  // namespace

LandmarkSet::LandmarkSet(const std::array<Point2, kNumLandmarks>& points, bool canonical)
    : points_(points), canonical_(canonical) {
  check_points(points_, canonical_);
}

LandmarkSet LandmarkSet::from_flat(std::span<const double> xy, bool canonical) {
  if (xy.size() != 2 * kNumLandmarks) {
    throw ContractError("expected 136 coordinates, got " + std::to_string(xy.size()));
  }
  std::array<Point2, kNumLandmarks> pts{};
  for (int i = 0; i < kNumLandmarks; ++i) pts[static_cast<std::size_t>(i)] = {xy[2 * i], xy[2 * i + 1]};
  return LandmarkSet(pts, canonical);
}

std::array<double, 2 * kNumLandmarks> LandmarkSet::flat() const {
  std::array<double, 2 * kNumLandmarks> out{};
  for (int i = 0; i < kNumLandmarks; ++i) {
    out[2 * i] = points_[static_cast<std::size_t>(i)].x;
    out[2 * i + 1] = points_[static_cast<std::size_t>(i)].y;
  }
  return out;
}

LandmarkSet LandmarkSet::with_point(int i, Point2 p) const {
  auto pts = points_;
  pts.at(static_cast<std::size_t>(i)) = p;
  return LandmarkSet(pts, canonical_, Unchecked{});
}

LandmarkDelta operator-(const LandmarkSet& a, const LandmarkSet& b) {
  LandmarkDelta d{};
  for (int i = 0; i < kNumLandmarks; ++i) d[static_cast<std::size_t>(i)] = {a[i].x - b[i].x, a[i].y - b[i].y};
  return d;
}

LandmarkSet operator+(const LandmarkSet& base, const LandmarkDelta& delta) {
  auto pts = base.points_;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].x += delta[i].x;
    pts[i].y += delta[i].y;
  }
  return LandmarkSet(pts, base.canonical_, LandmarkSet::Unchecked{});
}

LandmarkSet transformed_unchecked(const LandmarkSet&, const std::array<Point2, kNumLandmarks>& points,
                                  bool canonical) {
  check_points(points, false);
  return LandmarkSet(points, canonical, LandmarkSet::Unchecked{});
}

LandmarkDelta zero_delta() { return LandmarkDelta{}; }

double max_abs_difference(const LandmarkSet& a, const LandmarkSet& b) {
  double m = 0.0;
  for (int i = 0; i < kNumLandmarks; ++i) {
    m = std::max({m, std::fabs(a[i].x - b[i].x), std::fabs(a[i].y - b[i].y)});
  }
  return m;
}

LandmarkSet parse_landmark_line(const std::string& line, bool canonical, std::size_t line_number) {
  std::array<double, 2 * kNumLandmarks> xy{};
  std::size_t count = 0;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (count >= xy.size()) throw FormatError("more than 136 values on landmark line", line_number);
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw FormatError("unparseable landmark value", line_number);
    xy[count++] = v;
    p = next;
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p < end) {
      if (*p != ',') throw FormatError("expected ',' between landmark values", line_number);
      ++p;
    }
  }
  if (count != xy.size()) {
    throw FormatError("expected 136 values, found " + std::to_string(count), line_number);
  }
  try {
    return LandmarkSet::from_flat(xy, canonical);
  } catch (const ContractError& e) {
    throw FormatError(e.what(), line_number);
  }
}

std::string format_landmark_line(const LandmarkSet& frame) {
  std::string out;
  out.reserve(136 * 12);
  char buf[64];
  const auto xy = frame.flat();
  for (std::size_t i = 0; i < xy.size(); ++i) {
    if (i) out.push_back(',');
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, xy[i]);
    out.append(buf, ptr);
  }
  return out;
}

std::vector<LandmarkSet> read_landmark_file(const std::filesystem::path& path, bool canonical) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open landmark file " + path.string());
  std::vector<LandmarkSet> frames;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    frames.push_back(parse_landmark_line(line, canonical, line_number));
  }
  return frames;
}

void write_landmark_file(const std::filesystem::path& path, std::span<const LandmarkSet> frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write landmark file " + path.string());
  for (const auto& f : frames) out << format_landmark_line(f) << '\n';
}

}  // namespace emoface::geometry
