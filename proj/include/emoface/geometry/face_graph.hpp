#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emoface/geometry/delaunay.hpp"
#include "emoface/geometry/landmarks.hpp"

namespace emoface::geometry {

/// Ordered landmark graph: vertex i is landmark i, edges from Delaunay.
struct FaceGraph {
  std::vector<Point2> vertices;
  EdgeSet edges;
  /// Row-major n x n, symmetric, zero diagonal.
  std::vector<std::uint8_t> adjacency;

  int size() const { return static_cast<int>(vertices.size()); }
  bool adjacent(int i, int j) const {
    return adjacency[static_cast<std::size_t>(i) * vertices.size() + static_cast<std::size_t>(j)] != 0;
  }
  std::vector<int> neighbors(int i) const;
};

FaceGraph build_graph(std::span<const Point2> points);
FaceGraph build_face_graph(const LandmarkSet& landmarks);
/// Same topology, new vertex positions (used for generated graphs).
FaceGraph with_positions(const FaceGraph& graph, std::span<const Point2> points);

bool is_connected(const FaceGraph& graph);

inline constexpr int kNumRegions = 8;

/// Disjoint cover of the 68 landmark indices by facial parts.
struct RegionPartition {
  std::array<std::vector<int>, kNumRegions> regions;
  std::array<std::string, kNumRegions> names;

  /// Region id of every vertex.
  std::vector<int> region_of() const;
};

/// jaw, left brow, right brow, nose, left eye, right eye, outer lip, inner lip.
const RegionPartition& standard_partition();

/// Throws ContractError unless the partition covers 0..n-1 exactly once.
void validate_partition(const RegionPartition& partition, int num_vertices);

/// 8 x 8 symmetric zero-diagonal matrix: regions r != s are adjacent when
/// any graph edge joins one of their vertices.
std::vector<std::uint8_t> region_adjacency(const FaceGraph& graph, const RegionPartition& partition);

/// Mouth subset used by the M- landmark metrics (indices 48..67).
std::vector<int> mouth_indices();
std::vector<int> all_indices();

}  // namespace emoface::geometry
