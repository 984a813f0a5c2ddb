#include <algorithm>
#include <cmath>
#include <vector>

#include "emoface/metrics/image_metrics.hpp"

namespace emoface::metrics {

namespace {

constexpr int kBlock = 64;
constexpr double kBeta = 3.6;
constexpr double kJnbProbability = 0.63;
constexpr double kEdgeBlockFraction = 0.002;

// Distance between the extrema bracketing the edge at (x, y) along its row.
int edge_width(const std::vector<double>& img, int w, int x, int y, bool rising) {
  const double* row = img.data() + static_cast<std::size_t>(y) * w;
  int left = x, right = x;
  if (rising) {
    while (left > 0 && row[left - 1] < row[left]) --left;
    while (right < w - 1 && row[right + 1] > row[right]) ++right;
  } else {
    while (left > 0 && row[left - 1] > row[left]) --left;
    while (right < w - 1 && row[right + 1] < row[right]) ++right;
  }
  return right - left;
}

}  // namespace

double cpbd(const nn::Tensor& image) {
  const std::vector<double> g = to_gray255(image);
  const int h = image.dim(1), w = image.dim(2);
  if (h < 3 || w < 3) return 0.0;

  // Horizontal Sobel response: vertical edges.
  std::vector<double> gx(g.size(), 0.0);
  double peak = 0.0;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      auto at = [&](int yy, int xx) { return g[static_cast<std::size_t>(yy) * w + xx]; };
      const double v = (at(y - 1, x + 1) + 2 * at(y, x + 1) + at(y + 1, x + 1)) -
                       (at(y - 1, x - 1) + 2 * at(y, x - 1) + at(y + 1, x - 1));
      gx[static_cast<std::size_t>(y) * w + x] = v;
      peak = std::max(peak, std::fabs(v));
    }
  const double threshold = std::max(0.1 * peak, 8.0);
  std::vector<char> edge(g.size(), 0);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double m = std::fabs(gx[i]);
      if (m >= threshold && m >= std::fabs(gx[i - 1]) && m > std::fabs(gx[i + 1])) edge[i] = 1;
    }

  long total = 0, sharp = 0;
  for (int by = 0; by < h; by += kBlock)
    for (int bx = 0; bx < w; bx += kBlock) {
      const int y1 = std::min(h, by + kBlock), x1 = std::min(w, bx + kBlock);
      long count = 0;
      double lo = 255.0, hi = 0.0;
      for (int y = by; y < y1; ++y)
        for (int x = bx; x < x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          count += edge[i];
          lo = std::min(lo, g[i]);
          hi = std::max(hi, g[i]);
        }
      if (count <= kEdgeBlockFraction * (y1 - by) * (x1 - bx)) continue;
      const double w_jnb = (hi - lo) <= 50.0 ? 5.0 : 3.0;
      for (int y = by; y < y1; ++y)
        for (int x = bx; x < x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          if (!edge[i]) continue;
          const int width = edge_width(g, w, x, y, gx[i] > 0.0);
          const double p = 1.0 - std::exp(-std::pow(width / w_jnb, kBeta));
          ++total;
          if (p <= kJnbProbability) ++sharp;
        }
    }
  return total == 0 ? 0.0 : static_cast<double>(sharp) / static_cast<double>(total);
}

}  // namespace emoface::metrics
