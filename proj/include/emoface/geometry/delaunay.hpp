#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "emoface/geometry/landmarks.hpp"

namespace emoface::geometry {

/// Undirected edge stored as (min, max) vertex indices.
using Edge = std::pair<int, int>;
/// Sorted, duplicate-free edge list.
using EdgeSet = std::vector<Edge>;

struct Triangulation {
  /// Counter-clockwise vertex triples, sorted by smallest index first.
  std::vector<std::array<int, 3>> triangles;
  EdgeSet edges;
};

/// Delaunay triangulation of a planar point set.
///
/// Cocircular configurations are resolved by a symbolic perturbation that
/// favours lower point indices, so the output is a deterministic function of
/// the ordered input. Throws DegenerateGeometryError for fewer than three
/// points, duplicate points, or an all-collinear set.
Triangulation delaunay(std::span<const Point2> points);

/// Edge set of delaunay(points).
EdgeSet delaunay_triangulate(std::span<const Point2> points);

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
double orient2d(Point2 a, Point2 b, Point2 c);
/// Positive when d lies inside the circumcircle of counter-clockwise (a, b, c).
double incircle(Point2 a, Point2 b, Point2 c, Point2 d);

}  // namespace emoface::geometry
