#pragma once

#include "emoface/nn/tensor.hpp"

namespace emoface::metrics {

// Images are [C, H, W] in [-1, 1]; metrics remap them to [0, 1].

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE), capped at 100 dB. Throws ContractError on shape mismatch.
double psnr(const nn::Tensor& a, const nn::Tensor& b);

/// Mean structural similarity with an 11 x 11 Gaussian window (sigma 1.5,
/// valid positions only), K1 = 0.01, K2 = 0.03, averaged over channels.
/// Images must be at least 11 x 11.
double ssim(const nn::Tensor& a, const nn::Tensor& b);

/// No-reference sharpness in [0, 1] from the cumulative probability of blur
/// detection over vertical edges. Images without edges score 0.
double cpbd(const nn::Tensor& image);

/// Luma in [0, 255], row-major H x W.
std::vector<double> to_gray255(const nn::Tensor& image);

}  // namespace emoface::metrics
