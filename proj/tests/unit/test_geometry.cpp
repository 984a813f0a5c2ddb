#include <gtest/gtest.h>

#include <Eigen/LU>

#include <filesystem>
#include <fstream>

#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/geometry/blink.hpp"
#include "emoface/geometry/delaunay.hpp"
#include "emoface/geometry/face_graph.hpp"
#include "emoface/geometry/heatmap.hpp"
#include "emoface/geometry/landmarks.hpp"
#include "oracles.hpp"

using namespace emoface;
using namespace emoface::geometry;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "emoface_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

LandmarkSet transformed(const LandmarkSet& x, double s, double angle, double tx, double ty) {
  return apply_transform(SimilarityTransform::from_params(s, angle, tx, ty), x, false);
}

}  // namespace

TEST(Delaunay, SingleTriangle) {
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(delaunay_triangulate(pts), (EdgeSet{{0, 1}, {0, 2}, {1, 2}}));
}

TEST(Delaunay, InteriorPointSplitsTriangle) {
  const std::vector<Point2> pts = {{0, 0}, {4, 0}, {2, 3}, {2, 1}};
  const Triangulation t = delaunay(pts);
  EXPECT_EQ(t.triangles.size(), 3u);
  EXPECT_EQ(t.edges.size(), 6u);
  EXPECT_TRUE(oracle::check_delaunay(pts, t).ok);
}

TEST(Delaunay, RandomSetsPassBruteForceOracle) {
  nn::Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(48));
    const auto pts = oracle::random_points(rng, n);
    const auto check = oracle::check_delaunay(pts, delaunay(pts));
    EXPECT_TRUE(check.ok) << "trial " << trial << ": " << check.reason;
  }
}

TEST(Delaunay, CocircularGridIsValidAndDeterministic) {
  std::vector<Point2> grid;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) grid.push_back({static_cast<double>(j), static_cast<double>(i)});
  const Triangulation t = delaunay(grid);
  EXPECT_EQ(t.triangles.size(), 18u);
  EXPECT_EQ(delaunay(grid).edges, t.edges);
  const auto check = oracle::check_delaunay(grid, t);
  EXPECT_TRUE(check.ok) << check.reason;
}

TEST(Delaunay, DegenerateInputsThrow) {
  const std::vector<Point2> two = {{0, 0}, {1, 1}};
  const std::vector<Point2> line = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const std::vector<Point2> dup = {{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  EXPECT_THROW(delaunay(two), DegenerateGeometryError);
  EXPECT_THROW(delaunay(line), DegenerateGeometryError);
  EXPECT_THROW(delaunay(dup), DegenerateGeometryError);
}

TEST(FaceGraph, TemplateGraphIsConnectedAndPlanar) {
  const FaceGraph g = build_face_graph(canonical_template());
  EXPECT_EQ(g.size(), kNumLandmarks);
  EXPECT_LE(g.edges.size(), 3u * 68 - 6);
  EXPECT_TRUE(oracle::bfs_connected(g.size(), g.edges));
  EXPECT_TRUE(is_connected(g));
}

TEST(FaceGraph, AdjacencyMatchesEdges) {
  const FaceGraph g = build_face_graph(canonical_template());
  for (int i = 0; i < g.size(); ++i) {
    EXPECT_FALSE(g.adjacent(i, i));
    for (int j = 0; j < g.size(); ++j) {
      EXPECT_EQ(g.adjacent(i, j), g.adjacent(j, i));
      const bool listed = std::binary_search(g.edges.begin(), g.edges.end(), Edge{std::min(i, j), std::max(i, j)});
      EXPECT_EQ(g.adjacent(i, j), listed && i != j);
    }
  }
}

TEST(FaceGraph, ThreePointsAreFullyAdjacent) {
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {0, 1}};
  const FaceGraph g = build_graph(pts);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(g.adjacent(i, j), i != j);
}

TEST(FaceGraph, PartitionCoversEveryVertexOnce) {
  const RegionPartition& p = standard_partition();
  EXPECT_NO_THROW(validate_partition(p, kNumLandmarks));
  std::vector<int> seen(kNumLandmarks, 0);
  for (const auto& r : p.regions)
    for (int v : r) ++seen[static_cast<std::size_t>(v)];
  for (int c : seen) EXPECT_EQ(c, 1);
  RegionPartition broken = p;
  broken.regions[0].push_back(30);
  EXPECT_THROW(validate_partition(broken, kNumLandmarks), ContractError);
}

TEST(Alignment, TemplateAlignsToIdentity) {
  const auto [aligned, t] = align_to_canonical(canonical_template());
  EXPECT_NEAR(t.scale, 1.0, 1e-12);
  EXPECT_NEAR(t.translation.norm(), 0.0, 1e-12);
  EXPECT_LT(max_abs_difference(aligned, canonical_template()), 1e-12);
}

TEST(Alignment, RecoversSynthesizedTransforms) {
  nn::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = rng.uniform(20.0, 300.0), a = rng.uniform(-3.0, 3.0);
    const double tx = rng.uniform(-50.0, 250.0), ty = rng.uniform(-50.0, 250.0);
    const LandmarkSet placed = transformed(canonical_template(), s, a, tx, ty);
    const auto [aligned, t] = align_to_canonical(placed);
    EXPECT_NEAR(t.scale * s, 1.0, 1e-6);
    EXPECT_NEAR(std::remainder(t.angle() + a, 2 * M_PI), 0.0, 1e-6);
    EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
    EXPECT_LT(max_abs_difference(aligned, canonical_template()), 1e-6);
  }
}

TEST(Alignment, MirroredInputNeverYieldsReflection) {
  std::array<Point2, kNumLandmarks> pts = canonical_template().points();
  for (auto& p : pts) p.x = 1.0 - p.x + 0.01 * p.y;
  const auto [aligned, t] = align_to_canonical(LandmarkSet(pts, true));
  EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
  EXPECT_GT(t.scale, 0.0);
}

TEST(Alignment, ZeroSpreadThrows) {
  std::array<Point2, kNumLandmarks> pts{};
  for (auto& p : pts) p = {0.5, 0.5};
  EXPECT_THROW(align_to_canonical(LandmarkSet(pts, true)), DegenerateGeometryError);
}

TEST(Retarget, ZeroDeltaReturnsTargetNeutral) {
  const LandmarkSet target = transformed(canonical_template(), 90, 0.2, 10, 5);
  EXPECT_EQ(retarget_displacements(zero_delta(), target), target);
}

TEST(Retarget, TemplateTargetAddsDeltaUnchanged) {
  LandmarkDelta d = zero_delta();
  d[48] = {0.01, -0.02};
  d[57] = {0.0, 0.03};
  const LandmarkSet out = retarget_displacements(d, canonical_template());
  EXPECT_LT(max_abs_difference(out, canonical_template() + d), 1e-12);
}

TEST(Retarget, UniformScaleDoublesDisplacement) {
  const LandmarkSet target = transformed(canonical_template(), 2.0, 0.0, 0.0, 0.0);
  LandmarkDelta d = zero_delta();
  d[30] = {1.0, 0.0};
  const LandmarkSet out = retarget_displacements(d, target);
  EXPECT_NEAR(out[30].x - target[30].x, 2.0, 1e-9);
  EXPECT_NEAR(out[30].y - target[30].y, 0.0, 1e-9);
  EXPECT_NEAR(out[10].x - target[10].x, 0.0, 1e-12);
}

TEST(Landmarks, CanonicalRangeIsEnforced) {
  std::array<Point2, kNumLandmarks> pts = canonical_template().points();
  pts[3].x = 1.2;
  EXPECT_THROW(LandmarkSet(pts, true), ContractError);
  EXPECT_NO_THROW(LandmarkSet(pts, false));
  pts[3].x = std::nan("");
  EXPECT_THROW(LandmarkSet(pts, false), ContractError);
}

TEST(Landmarks, FileRoundTripAndErrors) {
  const LandmarkSet a = transformed(canonical_template(), 64, 0.1, 3, 4);
  const std::vector<LandmarkSet> frames = {a, canonical_template().as_canonical(false)};
  const auto path = temp_path("lm.txt");
  write_landmark_file(path, frames);
  const auto back = read_landmark_file(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], a);

  std::ofstream(temp_path("bad.txt")) << "1,2,3\n";
  try {
    read_landmark_file(temp_path("bad.txt"));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
}

TEST(Heatmap, PeaksAreOneAtVertexPixels) {
  const std::vector<Point2> pts = {{3, 4}, {10, 12}};
  const HeatmapStack h = render_heatmaps(pts, 16, 16, 1.5);
  EXPECT_EQ(h.channels.dim(0), 3);
  EXPECT_FLOAT_EQ(h.channels.at(0, 4, 3), 1.0f);
  EXPECT_FLOAT_EQ(h.channels.at(1, 12, 10), 1.0f);
  EXPECT_FLOAT_EQ(h.channels.at(2, 4, 3), 0.0f);
  for (float v : h.channels.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Heatmap, SubPixelPeakMatchesGaussian) {
  const std::vector<Point2> pts = {{5.3, 6.8}};
  const double sigma = 1.5;
  const HeatmapStack h = render_heatmaps(pts, 12, 12, sigma);
  const double expect = std::exp(-(0.3 * 0.3 + 0.2 * 0.2) / (2 * sigma * sigma));
  EXPECT_NEAR(h.channels.at(0, 7, 5), expect, 1e-6);
}

TEST(Heatmap, FarVerticesDoNotLeak) {
  const double sigma = 1.5;
  const std::vector<Point2> pts = {{4, 4}, {4 + 7 * sigma, 4}};
  const HeatmapStack h = render_heatmaps(pts, 10, 20, sigma);
  EXPECT_LT(h.channels.at(0, 4, static_cast<int>(4 + 7 * sigma)), 1e-3);
  EXPECT_LT(h.channels.at(1, 4, 4), 1e-3);
}

TEST(Heatmap, BackgroundIsOneMinusMax) {
  nn::Rng rng(4);
  std::vector<Point2> pts;
  for (int k = 0; k < 5; ++k) pts.push_back({rng.uniform(0, 15), rng.uniform(0, 15)});
  const HeatmapStack h = render_heatmaps(pts, 16, 16, 1.5);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      float m = 0.0f;
      for (int c = 0; c < 5; ++c) m = std::max(m, h.channels.at(c, i, j));
      EXPECT_EQ(h.channels.at(5, i, j), std::clamp(1.0f - m, 0.0f, 1.0f));
    }
}

TEST(Heatmap, DifferenceIsZeroAntisymmetricAndLocal) {
  const LandmarkSet base = transformed(canonical_template(), 14, 0, 1, 1);
  const FaceGraph g = build_face_graph(base);
  const double sigma = 1.5;
  const FaceGraph moved = with_positions(g, base.with_point(33, {base[33].x + 3 * sigma, base[33].y}).span());
  const nn::Tensor zero = heatmap_difference(g, g, 16, 16, sigma);
  for (float v : zero.values()) EXPECT_EQ(v, 0.0f);
  const nn::Tensor ab = heatmap_difference(g, moved, 16, 16, sigma);
  const nn::Tensor ba = heatmap_difference(moved, g, 16, 16, sigma);
  for (std::size_t k = 0; k < ab.numel(); ++k) EXPECT_EQ(ab[k], -ba[k]);
  const std::size_t plane = 16 * 16;
  for (int c = 0; c < kNumLandmarks; ++c) {
    if (c == 33) continue;
    for (std::size_t k = 0; k < plane; ++k) ASSERT_EQ(ab[static_cast<std::size_t>(c) * plane + k], 0.0f) << c;
  }
}

TEST(Heatmap, ToGridPreservesPixelCentres) {
  const Point2 p = to_grid({31.5, 31.5}, 64, 64, 16, 16);
  EXPECT_DOUBLE_EQ(p.x, 7.5);
  const Point2 q = to_grid({-0.5, -0.5}, 64, 64, 16, 16);
  EXPECT_DOUBLE_EQ(q.x, -0.5);
}

TEST(Blink, ZeroAmplitudeLeavesSequence) {
  const std::vector<LandmarkSet> seq(40, canonical_template());
  BlinkParams p;
  p.amplitude = 0.0;
  EXPECT_EQ(add_blinks(seq, p, 3), seq);
}

TEST(Blink, OnlyUpperLidsMove) {
  const std::vector<LandmarkSet> seq(90, canonical_template());
  BlinkParams p;
  p.mean_interval_s = 0.5;
  const auto out = add_blinks(seq, p, 11);
  bool any_change = false;
  for (std::size_t f = 0; f < out.size(); ++f) {
    for (int i = 0; i < kNumLandmarks; ++i) {
      const bool lid = std::find(std::begin(kUpperLid), std::end(kUpperLid), i) != std::end(kUpperLid);
      if (!lid) {
        ASSERT_EQ(out[f][i], seq[f][i]);
      } else if (!(out[f][i] == seq[f][i])) {
        any_change = true;
      }
    }
  }
  EXPECT_TRUE(any_change);
}

TEST(Blink, ApexClosesAmplitudeOfGap) {
  BlinkParams p;
  p.duration_s = 0.2;
  p.amplitude = 0.8;
  const std::vector<LandmarkSet> seq(10, canonical_template());
  // Onset chosen so that frame 3 (t = 0.1 s) is the apex.
  const std::vector<double> onsets = {0.0};
  const auto out = add_blinks_at(seq, p, onsets);
  EXPECT_DOUBLE_EQ(blink_closure(0.1, 0.0, 0.2), 1.0);
  for (int k = 0; k < 4; ++k) {
    const double before = seq[3][kLowerLid[k]].y - seq[3][kUpperLid[k]].y;
    const double after = out[3][kLowerLid[k]].y - out[3][kUpperLid[k]].y;
    EXPECT_NEAR(before - after, p.amplitude * before, 1e-6);
  }
}

TEST(Blink, OnsetsAreSeededAndSeparated) {
  BlinkParams p;
  const auto a = blink_onsets(3000, p, 5), b = blink_onsets(3000, p, 5);
  EXPECT_EQ(a, b);
  ASSERT_GT(a.size(), 5u);
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_GE(a[k] - a[k - 1], p.duration_s);
}
