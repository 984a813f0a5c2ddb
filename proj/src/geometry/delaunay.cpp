#include "emoface/geometry/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "emoface/errors.hpp"

namespace emoface::geometry {

double orient2d(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  return adx * (bdy * clift - blift * cdy) - ady * (bdx * clift - blift * cdx) + alift * (bdx * cdy - bdy * cdx);
}

namespace {

// Relative thresholds below which a predicate is treated as exactly zero.
constexpr long double kOrientTol = 1e-12L;
constexpr long double kInCircleTol = 1e-10L;

// Sorts three or four indices ascending and reports the permutation parity.
template <std::size_t N>
int sort_with_parity(std::array<int, N>& v) {
  int parity = 1;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j + 1 < N - i; ++j)
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        parity = -parity;
      }
  return parity;
}

class Predicates {
 public:
  explicit Predicates(std::span<const Point2> pts) : pts_(pts) {}

  // Sign of the orientation with a tolerance, evaluated on index-sorted
  // arguments so every permutation of a triple classifies identically.
  int orient(int a, int b, int c) const {
    std::array<int, 3> v{a, b, c};
    const int parity = sort_with_parity(v);
    const Point2 p = pts_[v[0]], q = pts_[v[1]], r = pts_[v[2]];
    const long double det = static_cast<long double>(q.x - p.x) * (r.y - p.y) -
                            static_cast<long double>(q.y - p.y) * (r.x - p.x);
    const long double mag = std::fabs(static_cast<long double>(q.x - p.x) * (r.y - p.y)) +
                            std::fabs(static_cast<long double>(q.y - p.y) * (r.x - p.x));
    if (std::fabs(det) <= kOrientTol * mag) return 0;
    return parity * (det > 0 ? 1 : -1);
  }

  // > 0 when d is inside the (perturbed) circumcircle of counter-clockwise
  // (a, b, c). Exact ties are broken as if each lifted height were raised by
  // an infinitesimal that is larger for smaller indices.
  int in_circle(int a, int b, int c, int d) const {
    std::array<int, 4> v{a, b, c, d};
    const int parity = sort_with_parity(v);
    const Point2 o = pts_[v[3]];
    long double m[3][3];
    long double perm = 0.0L;
    for (int r = 0; r < 3; ++r) {
      const long double dx = static_cast<long double>(pts_[v[r]].x) - o.x;
      const long double dy = static_cast<long double>(pts_[v[r]].y) - o.y;
      m[r][0] = dx;
      m[r][1] = dy;
      m[r][2] = dx * dx + dy * dy;
    }
    const long double det = m[0][0] * (m[1][1] * m[2][2] - m[2][1] * m[1][2]) -
                            m[0][1] * (m[1][0] * m[2][2] - m[2][0] * m[1][2]) +
                            m[0][2] * (m[1][0] * m[2][1] - m[2][0] * m[1][1]);
    perm = std::fabs(m[0][0]) * (std::fabs(m[1][1] * m[2][2]) + std::fabs(m[2][1] * m[1][2])) +
           std::fabs(m[0][1]) * (std::fabs(m[1][0] * m[2][2]) + std::fabs(m[2][0] * m[1][2])) +
           std::fabs(m[0][2]) * (std::fabs(m[1][0] * m[2][1]) + std::fabs(m[2][0] * m[1][1]));
    if (std::fabs(det) > kInCircleTol * perm) return parity * (det > 0 ? 1 : -1);

    // Coefficient of the lifted height of sorted row k is
    // (-1)^(k+3) * orient(other three rows in order), k = 1..4.
    for (int k = 0; k < 4; ++k) {
      std::array<int, 3> others{};
      for (int r = 0, j = 0; r < 4; ++r)
        if (r != k) others[j++] = v[r];
      const int o3 = orient(others[0], others[1], others[2]);
      if (o3 != 0) {
        const int cofactor_sign = ((k + 1 + 3) % 2 == 0) ? 1 : -1;
        return parity * cofactor_sign * o3;
      }
    }
    return 0;
  }

 private:
  std::span<const Point2> pts_;
};

class Mesh {
 public:
  Mesh(std::size_t n, const Predicates& pred) : n_(n), pred_(pred) {}

  void add(int a, int b, int c) {
    if (pred_.orient(a, b, c) < 0) std::swap(b, c);
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    edge_[key(a, b)] = id;
    edge_[key(b, c)] = id;
    edge_[key(c, a)] = id;
  }

  // Restores the empty-circumcircle property for queued edges.
  void legalize(std::vector<Edge>& stack) {
    std::size_t guard = 0;
    const std::size_t limit = 64 * n_ * n_ + 1024;
    while (!stack.empty()) {
      if (++guard > limit) throw DegenerateGeometryError("delaunay: edge flipping did not converge");
      auto [a, b] = stack.back();
      stack.pop_back();
      auto t1 = edge_.find(key(a, b));
      auto t2 = edge_.find(key(b, a));
      if (t1 == edge_.end() || t2 == edge_.end()) continue;
      const int c = third(t1->second, a, b);
      const int d = third(t2->second, b, a);
      if (pred_.in_circle(a, b, c, d) <= 0) continue;
      // Flip only strictly convex quads (a, d, b, c).
      if (pred_.orient(a, d, c) <= 0 || pred_.orient(d, b, c) <= 0) continue;
      remove(t1->second);
      remove(edge_.at(key(b, a)));
      add(a, d, c);
      add(d, b, c);
      stack.push_back({a, d});
      stack.push_back({d, b});
      stack.push_back({b, c});
      stack.push_back({c, a});
    }
  }

  std::vector<Edge> all_edges() const {
    std::vector<Edge> out;
    for (const auto& t : tris_) {
      if (t[0] < 0) continue;
      for (int k = 0; k < 3; ++k) out.push_back({t[k], t[(k + 1) % 3]});
    }
    return out;
  }

  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_)
      if (t[0] >= 0) out.push_back(t);
    return out;
  }

 private:
  std::uint64_t key(int u, int v) const { return static_cast<std::uint64_t>(u) * n_ + static_cast<std::uint64_t>(v); }

  int third(int tri, int a, int b) const {
    for (int v : tris_[static_cast<std::size_t>(tri)])
      if (v != a && v != b) return v;
    return -1;
  }

  void remove(int id) {
    auto& t = tris_[static_cast<std::size_t>(id)];
    for (int k = 0; k < 3; ++k) edge_.erase(key(t[k], t[(k + 1) % 3]));
    t = {-1, -1, -1};
  }

  std::size_t n_;
  const Predicates& pred_;
  std::vector<std::array<int, 3>> tris_;
  std::unordered_map<std::uint64_t, int> edge_;
};

}  // namespace

Triangulation delaunay(std::span<const Point2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw DegenerateGeometryError("delaunay: need at least 3 points");
  double extent = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DegenerateGeometryError("delaunay: non-finite point");
    extent = std::max({extent, std::fabs(p.x), std::fabs(p.y)});
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Point2 p = points[a], q = points[b];
    if (p.x != q.x) return p.x < q.x;
    if (p.y != q.y) return p.y < q.y;
    return a < b;
  });
  const double dup_tol = 1e-12 * std::max(extent, 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    const Point2 p = points[order[i - 1]], q = points[order[i]];
    if (std::fabs(p.x - q.x) <= dup_tol && std::fabs(p.y - q.y) <= dup_tol) {
      throw DegenerateGeometryError("delaunay: duplicate points " + std::to_string(order[i - 1]) + " and " +
                                    std::to_string(order[i]));
    }
  }

  Predicates pred(points);
  // Lexicographic order guarantees each new point lies outside the current
  // hull. The first k sorted points may be collinear; fan them to point k.
  std::size_t k = 2;
  while (k < n && pred.orient(order[0], order[1], order[k]) == 0) ++k;
  if (k == n) throw DegenerateGeometryError("delaunay: all points are collinear");

  Mesh mesh(n, pred);
  std::vector<Edge> stack;
  const int apex = order[k];
  for (std::size_t i = 0; i + 1 < k; ++i) mesh.add(order[i], order[i + 1], apex);

  std::vector<int> hull;  // counter-clockwise
  if (pred.orient(order[0], order[k - 1], apex) > 0) {
    for (std::size_t i = 0; i < k; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(apex);
    for (std::size_t i = k - 1; i >= 1; --i) hull.push_back(order[i]);
  }
  for (const auto& e : mesh.all_edges()) stack.push_back(e);
  mesh.legalize(stack);

  for (std::size_t idx = k + 1; idx < n; ++idx) {
    const int p = order[idx];
    const std::size_t h = hull.size();
    std::vector<char> visible(h);
    for (std::size_t i = 0; i < h; ++i) visible[i] = pred.orient(hull[i], hull[(i + 1) % h], p) < 0;
    std::size_t start = h;
    for (std::size_t i = 0; i < h; ++i)
      if (visible[i] && !visible[(i + h - 1) % h]) {
        start = i;
        break;
      }
    if (start == h) throw DegenerateGeometryError("delaunay: point not outside hull (numerical failure)");
    std::size_t count = 0;
    while (count < h && visible[(start + count) % h]) {
      const int u = hull[(start + count) % h], v = hull[(start + count + 1) % h];
      mesh.add(v, u, p);
      stack.push_back({u, v});
      ++count;
    }
    // Replace the visible chain's interior vertices with p.
    std::vector<int> next;
    next.reserve(h + 1);
    const std::size_t first = start, last = (start + count) % h;
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t pos = (last + i) % h;
      next.push_back(hull[pos]);
      if (pos == first) break;
    }
    next.push_back(p);
    hull = std::move(next);
    mesh.legalize(stack);
  }

  for (const auto& e : mesh.all_edges()) stack.push_back(e);
  mesh.legalize(stack);

  Triangulation out;
  for (auto t : mesh.triangles()) {
    std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    out.triangles.push_back(t);
  }
  std::sort(out.triangles.begin(), out.triangles.end());
  for (const auto& [u, v] : mesh.all_edges()) out.edges.push_back({std::min(u, v), std::max(u, v)});
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

EdgeSet delaunay_triangulate(std::span<const Point2> points) { return delaunay(points).edges; }

}  // namespace emoface::geometry
