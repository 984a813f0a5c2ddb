#include "emoface/adaptation/image_ops.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::adaptation {

namespace {

void check_composite(const nn::Tensor& a, const nn::Tensor& b, const nn::Tensor& mask) {
  if (a.ndim() != 3 || a.dim(0) != 3) throw ContractError("composite: image must be [3, H, W]");
  if (!a.same_shape(b)) {
    throw ContractError("composite: image shapes differ " + nn::shape_string(a.shape()) + " vs " +
                        nn::shape_string(b.shape()));
  }
  if (mask.ndim() != 3 || mask.dim(0) != 1 || mask.dim(1) != a.dim(1) || mask.dim(2) != a.dim(2)) {
    throw ContractError("composite: mask must be [1, H, W] matching the image, got " + nn::shape_string(mask.shape()));
  }
  for (float m : mask.values())
    if (m != 0.0f && m != 1.0f) throw ContractError("composite: mask is not binary");
}

nn::Tensor composite(const nn::Tensor& fg, const nn::Tensor& bg, const nn::Tensor& mask) {
  check_composite(fg, bg, mask);
  const std::size_t plane = mask.numel();
  nn::Tensor out(fg.shape());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i) {
      const float m = mask[i];
      out[c * plane + i] = m * fg[c * plane + i] + (1.0f - m) * bg[c * plane + i];
    }
  return out;
}

}  // namespace

nn::Tensor replace_background(const nn::Tensor& face, const nn::Tensor& background, const nn::Tensor& fg_mask) {
  return composite(face, background, fg_mask);
}

nn::Tensor restore_background(const nn::Tensor& generated, const nn::Tensor& original, const nn::Tensor& fg_mask) {
  return composite(generated, original, fg_mask);
}

nn::Tensor heuristic_face_mask(int height, int width, const geometry::LandmarkSet* lm) {
  if (height < 1 || width < 1) throw ContractError("heuristic_face_mask: empty size");
  double cx = 0.5 * (width - 1), cy = 0.45 * (height - 1), rx = 0.36 * width, ry = 0.45 * height;
  double chin = cy + ry;
  if (lm) {
    double x0 = (*lm)[0].x, x1 = x0, y0 = (*lm)[0].y, y1 = y0;
    for (const auto& p : lm->points()) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    // Landmarks stop at the brows; extend upward for the forehead.
    const double h = y1 - y0;
    y0 -= 0.35 * h;
    cx = 0.5 * (x0 + x1);
    cy = 0.5 * (y0 + y1);
    rx = 0.5 * (x1 - x0) * 1.1;
    ry = 0.5 * (y1 - y0) * 1.08;
    chin = y1;
  }
  const double neck_half = 0.45 * rx;
  nn::Tensor mask({1, height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = (x - cx) / rx, v = (y - cy) / ry;
      const bool in_ellipse = u * u + v * v <= 1.0;
      const bool in_neck = y >= chin - 0.1 * ry && std::fabs(x - cx) <= neck_half;
      mask.at(0, y, x) = (in_ellipse || in_neck) ? 1.0f : 0.0f;
    }
  return mask;
}

nn::Tensor augment(const nn::Tensor& image, std::uint64_t seed, const AugmentConfig& cfg) {
  if (image.ndim() != 3 || image.dim(0) != 3) throw ContractError("augment: image must be [3, H, W]");
  nn::Rng rng(seed);
  const double hue = rng.uniform(-cfg.hue, cfg.hue);
  const double gain = 1.0 + rng.uniform(-cfg.contrast, cfg.contrast);
  const double offset = rng.uniform(-cfg.brightness, cfg.brightness);
  const std::size_t plane = image.numel() / 3;
  nn::Tensor out = image;
  float* r = out.data();
  float* g = r + plane;
  float* b = g + plane;

  if (cfg.hue != 0.0) {
    // Rotation of the chroma plane in YIQ space.
    const double th = 2.0 * M_PI * hue, c = std::cos(th), s = std::sin(th);
    for (std::size_t i = 0; i < plane; ++i) {
      const double yy = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
      const double ii = 0.596 * r[i] - 0.274 * g[i] - 0.322 * b[i];
      const double qq = 0.211 * r[i] - 0.523 * g[i] + 0.312 * b[i];
      const double i2 = c * ii - s * qq, q2 = s * ii + c * qq;
      r[i] = static_cast<float>(yy + 0.956 * i2 + 0.621 * q2);
      g[i] = static_cast<float>(yy - 0.272 * i2 - 0.647 * q2);
      b[i] = static_cast<float>(yy - 1.106 * i2 + 1.703 * q2);
    }
  }
  if (cfg.contrast != 0.0) {
    double mean = 0.0;
    for (float v : out.values()) mean += v;
    mean /= static_cast<double>(out.numel());
    for (auto& v : out.values()) v = static_cast<float>(mean + gain * (v - mean));
  }
  if (cfg.brightness != 0.0) {
    for (auto& v : out.values()) v = static_cast<float>(v + offset);
  }
  for (auto& v : out.values()) v = std::clamp(v, -1.0f, 1.0f);
  return out;
}

}  // namespace emoface::adaptation
