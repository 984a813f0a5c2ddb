#pragma once

#include <filesystem>

#include "emoface/nn/tensor.hpp"

namespace emoface::pipeline {

/// 8-bit PNG -> [3, H, W] in [-1, 1]. Gray inputs are replicated, alpha is
/// dropped.
nn::Tensor read_png(const std::filesystem::path& path);
/// [3, H, W] in [-1, 1] -> 8-bit RGB PNG (values clamped, rounded).
void write_png(const std::filesystem::path& path, const nn::Tensor& image);

/// Single-channel mask: pixels >= 128 are foreground. Returns [1, H, W] in {0, 1}.
nn::Tensor read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const nn::Tensor& mask);

/// Round trip through 8-bit storage, as write_png followed by read_png.
nn::Tensor quantize_8bit(const nn::Tensor& image);

}  // namespace emoface::pipeline
