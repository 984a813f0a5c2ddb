#include "emoface/geometry/face_graph.hpp"

#include <numeric>
#include <queue>

#include "emoface/errors.hpp"

namespace emoface::geometry {

std::vector<int> FaceGraph::neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (adjacent(i, j)) out.push_back(j);
  return out;
}

FaceGraph build_graph(std::span<const Point2> points) {
  FaceGraph g;
  g.vertices.assign(points.begin(), points.end());
  g.edges = delaunay_triangulate(points);
  const std::size_t n = points.size();
  g.adjacency.assign(n * n, 0);
  for (const auto& [u, v] : g.edges) {
    g.adjacency[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = 1;
    g.adjacency[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = 1;
  }
  return g;
}

FaceGraph build_face_graph(const LandmarkSet& landmarks) { return build_graph(landmarks.span()); }

FaceGraph with_positions(const FaceGraph& graph, std::span<const Point2> points) {
  if (points.size() != graph.vertices.size()) {
    throw ContractError("with_positions: expected " + std::to_string(graph.vertices.size()) + " points");
  }
  FaceGraph g = graph;
  g.vertices.assign(points.begin(), points.end());
  return g;
}

bool is_connected(const FaceGraph& graph) {
  const int n = graph.size();
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : graph.neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == n;
}

std::vector<int> RegionPartition::region_of() const {
  int n = 0;
  for (const auto& r : regions) n += static_cast<int>(r.size());
  std::vector<int> out(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < kNumRegions; ++k)
    for (int v : regions[static_cast<std::size_t>(k)]) out.at(static_cast<std::size_t>(v)) = k;
  return out;
}

namespace {

std::vector<int> range(int first, int last) {
  std::vector<int> v(static_cast<std::size_t>(last - first + 1));
  std::iota(v.begin(), v.end(), first);
  return v;
}

}  // namespace

const RegionPartition& standard_partition() {
  static const RegionPartition partition = [] {
    RegionPartition p;
    p.regions = {range(0, 16),  range(17, 21), range(22, 26), range(27, 35),
                 range(36, 41), range(42, 47), range(48, 59), range(60, 67)};
    p.names = {"jaw", "left brow", "right brow", "nose", "left eye", "right eye", "outer lip", "inner lip"};
    return p;
  }();
  return partition;
}

void validate_partition(const RegionPartition& partition, int num_vertices) {
  std::vector<int> hits(static_cast<std::size_t>(num_vertices), 0);
  for (const auto& region : partition.regions) {
    if (region.empty()) throw ContractError("partition has an empty region");
    for (int v : region) {
      if (v < 0 || v >= num_vertices) throw ContractError("partition index out of range: " + std::to_string(v));
      ++hits[static_cast<std::size_t>(v)];
    }
  }
  for (int v = 0; v < num_vertices; ++v) {
    if (hits[static_cast<std::size_t>(v)] != 1) {
      throw ContractError("vertex " + std::to_string(v) + " is covered " +
                          std::to_string(hits[static_cast<std::size_t>(v)]) + " times");
    }
  }
}

std::vector<std::uint8_t> region_adjacency(const FaceGraph& graph, const RegionPartition& partition) {
  validate_partition(partition, graph.size());
  const auto region = partition.region_of();
  std::vector<std::uint8_t> a(kNumRegions * kNumRegions, 0);
  for (const auto& [u, v] : graph.edges) {
    const int r = region[static_cast<std::size_t>(u)], s = region[static_cast<std::size_t>(v)];
    if (r == s) continue;
    a[static_cast<std::size_t>(r * kNumRegions + s)] = 1;
    a[static_cast<std::size_t>(s * kNumRegions + r)] = 1;
  }
  return a;
}

std::vector<int> mouth_indices() { return range(48, 67); }
std::vector<int> all_indices() { return range(0, kNumLandmarks - 1); }

}  // namespace emoface::geometry
