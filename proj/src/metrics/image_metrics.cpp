#include "emoface/metrics/image_metrics.hpp"

#include <cmath>
#include <vector>

#include "emoface/errors.hpp"

namespace emoface::metrics {

namespace {

void check_pair(const nn::Tensor& a, const nn::Tensor& b, const char* what) {
  if (a.ndim() != 3) throw ContractError(std::string(what) + ": expected [C, H, W], got " + nn::shape_string(a.shape()));
  if (!a.same_shape(b)) {
    throw ContractError(std::string(what) + ": shape mismatch " + nn::shape_string(a.shape()) + " vs " +
                        nn::shape_string(b.shape()));
  }
}

double unit(float v) { return (static_cast<double>(v) + 1.0) * 0.5; }

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  double total = 0.0;
  const double c = 0.5 * (size - 1);
  for (int i = 0; i < size; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (auto& v : w) v /= total;
  return w;
}

// Valid-mode separable filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& x, int h, int w, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int oh = h - n + 1, ow = w - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x0 = 0; x0 < ow; ++x0) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(y) * w + x0 + i];
      tmp[static_cast<std::size_t>(y) * ow + x0] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y0 = 0; y0 < oh; ++y0)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y0 + i) * ow + x];
      out[static_cast<std::size_t>(y0) * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const nn::Tensor& a, const nn::Tensor& b) {
  check_pair(a, b, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = unit(a[i]) - unit(b[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.numel());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const nn::Tensor& a, const nn::Tensor& b) {
  check_pair(a, b, "ssim");
  constexpr int kWin = 11;
  const int c = a.dim(0), h = a.dim(1), w = a.dim(2);
  if (h < kWin || w < kWin) throw ContractError("ssim: images must be at least 11 x 11");
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const auto k = gaussian_window(kWin, 1.5);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double total = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
    for (std::size_t i = 0; i < plane; ++i) {
      x[i] = unit(a[ch * plane + i]);
      y[i] = unit(b[ch * plane + i]);
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, k), my = filter_valid(y, h, w, k);
    const auto sxx = filter_valid(xx, h, w, k), syy = filter_valid(yy, h, w, k), sxy = filter_valid(xy, h, w, k);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double mxy = mx[i] * my[i];
      const double m2 = mx[i] * mx[i] + my[i] * my[i];
      const double vx = sxx[i] - mx[i] * mx[i], vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mxy;
      acc += ((2.0 * mxy + c1) * (2.0 * cov + c2)) / ((m2 + c1) * (vx + vy + c2));
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / c;
}

std::vector<double> to_gray255(const nn::Tensor& image) {
  if (image.ndim() != 3 || (image.dim(0) != 3 && image.dim(0) != 1)) {
    throw ContractError("expected [3, H, W] or [1, H, W], got " + nn::shape_string(image.shape()));
  }
  const std::size_t plane = static_cast<std::size_t>(image.dim(1)) * image.dim(2);
  std::vector<double> g(plane);
  for (std::size_t i = 0; i < plane; ++i) {
    const double v = image.dim(0) == 3
                         ? 0.299 * unit(image[i]) + 0.587 * unit(image[plane + i]) + 0.114 * unit(image[2 * plane + i])
                         : unit(image[i]);
    g[i] = 255.0 * v;
  }
  return g;
}

}  // namespace emoface::metrics
