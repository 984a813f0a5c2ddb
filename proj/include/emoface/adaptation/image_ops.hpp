#pragma once

#include <cstdint>

#include "emoface/geometry/landmarks.hpp"
#include "emoface/nn/tensor.hpp"

namespace emoface::adaptation {

/// mask * face + (1 - mask) * background for face, background [3, H, W] and
/// a binary mask [1, H, W]. Throws ContractError on shape mismatch or a
/// non-binary mask.
nn::Tensor replace_background(const nn::Tensor& face, const nn::Tensor& background, const nn::Tensor& fg_mask);
/// Puts the original background back behind a generated frame.
nn::Tensor restore_background(const nn::Tensor& generated, const nn::Tensor& original, const nn::Tensor& fg_mask);

/// Ellipse around the face plus a neck rectangle below the chin, [1, H, W].
/// Without landmarks the ellipse is centred in the frame.
nn::Tensor heuristic_face_mask(int height, int width, const geometry::LandmarkSet* pixel_landmarks = nullptr);

/// Jitter ranges: brightness offset and contrast gain in [-x, x], hue shift
/// as a fraction of the hue circle.
struct AugmentConfig {
  double brightness = 0.2;
  double contrast = 0.2;
  double hue = 0.05;
};

/// Seeded colour jitter of a [3, H, W] image in [-1, 1]; output is clamped
/// to [-1, 1]. A zero range leaves its component untouched.
nn::Tensor augment(const nn::Tensor& image, std::uint64_t seed, const AugmentConfig& config = {});

}  // namespace emoface::adaptation
