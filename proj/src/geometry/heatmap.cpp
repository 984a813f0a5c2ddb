#include "emoface/geometry/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/errors.hpp"

namespace emoface::geometry {

HeatmapStack render_heatmaps(std::span<const Point2> grid_points, int height, int width, double sigma) {
  if (height <= 0 || width <= 0) throw ContractError("heatmap grid must be non-empty");
  if (!(sigma > 0.0)) throw ContractError("heatmap sigma must be positive");
  const int n = static_cast<int>(grid_points.size());
  HeatmapStack out;
  out.sigma = sigma;
  out.channels = nn::Tensor({n + 1, height, width});
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> gx(static_cast<std::size_t>(width)), gy(static_cast<std::size_t>(height));
  std::vector<float> peak(static_cast<std::size_t>(height * width), 0.0f);
  for (int c = 0; c < n; ++c) {
    const Point2 v = grid_points[static_cast<std::size_t>(c)];
    for (int j = 0; j < width; ++j) gx[static_cast<std::size_t>(j)] = std::exp(-(j - v.x) * (j - v.x) * inv);
    for (int i = 0; i < height; ++i) gy[static_cast<std::size_t>(i)] = std::exp(-(i - v.y) * (i - v.y) * inv);
    float* dst = out.channels.data() + static_cast<std::size_t>(c) * height * width;
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const float value = static_cast<float>(gy[static_cast<std::size_t>(i)] * gx[static_cast<std::size_t>(j)]);
        dst[i * width + j] = value;
        float& m = peak[static_cast<std::size_t>(i * width + j)];
        m = std::max(m, value);
      }
    }
  }
  float* bg = out.channels.data() + static_cast<std::size_t>(n) * height * width;
  for (std::size_t k = 0; k < peak.size(); ++k) bg[k] = std::clamp(1.0f - peak[k], 0.0f, 1.0f);
  return out;
}

HeatmapStack render_heatmaps(const LandmarkSet& grid_landmarks, int height, int width, double sigma) {
  return render_heatmaps(grid_landmarks.span(), height, width, sigma);
}

Point2 to_grid(Point2 p, int src_height, int src_width, int height, int width) {
  return {(p.x + 0.5) * width / src_width - 0.5, (p.y + 0.5) * height / src_height - 0.5};
}

std::vector<Point2> to_grid(std::span<const Point2> pts, int src_height, int src_width, int height, int width) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(to_grid(p, src_height, src_width, height, width));
  return out;
}

nn::Tensor heatmap_difference(const FaceGraph& g_in, const FaceGraph& g_out, int height, int width, double sigma) {
  if (g_in.size() != g_out.size()) throw ContractError("heatmap_difference: vertex counts differ");
  const HeatmapStack a = render_heatmaps(g_in.vertices, height, width, sigma);
  HeatmapStack b = render_heatmaps(g_out.vertices, height, width, sigma);
  for (std::size_t k = 0; k < b.channels.numel(); ++k) b.channels[k] -= a.channels[k];
  return std::move(b.channels);
}

}  // namespace emoface::geometry
