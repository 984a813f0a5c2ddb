#pragma once

#include <span>

#include "emoface/geometry/face_graph.hpp"
#include "emoface/geometry/landmarks.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::geometry {

/// 69 x H x W: one peak-normalized Gaussian per landmark plus background.
struct HeatmapStack {
  nn::Tensor channels;
  double sigma = 1.5;

  int height() const { return channels.dim(1); }
  int width() const { return channels.dim(2); }
};

/// Pixel (i, j) has center (x = j, y = i). Points are in grid pixels; the
/// background channel is clamp(1 - max over landmark channels).
HeatmapStack render_heatmaps(std::span<const Point2> grid_points, int height, int width, double sigma);
HeatmapStack render_heatmaps(const LandmarkSet& grid_landmarks, int height, int width, double sigma);

/// Maps image-pixel coordinates of a (src_h x src_w) image onto an (h x w)
/// grid with matching pixel centers.
Point2 to_grid(Point2 p, int src_height, int src_width, int height, int width);
std::vector<Point2> to_grid(std::span<const Point2> pts, int src_height, int src_width, int height, int width);

/// render(g_out) - render(g_in); both graphs in grid pixels.
nn::Tensor heatmap_difference(const FaceGraph& g_in, const FaceGraph& g_out, int height, int width, double sigma);

}  // namespace emoface::geometry
