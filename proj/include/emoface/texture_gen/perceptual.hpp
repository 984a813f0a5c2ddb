#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "emoface/nn/archive.hpp"
#include "emoface/nn/autograd.hpp"

namespace emoface::texture_gen {

/// Frozen multi-scale feature extractor used by the perceptual loss.
/// Implementations must be deterministic and safe for concurrent use.
class PerceptualExtractor {
 public:
  virtual ~PerceptualExtractor() = default;
  /// image [N, 3, H, W] in [-1, 1] -> feature maps, coarsening with depth.
  virtual std::vector<nn::Var> features(const nn::Var& image) const = 0;
};

/// Seeded random convolution pyramid: 4 levels at 1, 1/2, 1/4 and 1/8 of
/// the input resolution. Needs no external weights.
class RandomPyramidExtractor : public PerceptualExtractor {
 public:
  explicit RandomPyramidExtractor(std::uint64_t seed = 7, int channels = 8);
  std::vector<nn::Var> features(const nn::Var& image) const override;

 private:
  std::vector<nn::Var> weights_, biases_;
};

/// 16-layer ImageNet classifier features (relu1_2, relu2_2, relu3_3,
/// relu4_3). Weights come from an archive with tensors named
/// "conv{block}_{layer}.weight" / ".bias" in [O, C, 3, 3] / [O] layout.
class Vgg16Extractor : public PerceptualExtractor {
 public:
  /// Throws ConfigError when the file is missing or lacks a tensor.
  static std::unique_ptr<Vgg16Extractor> load(const std::filesystem::path& weights);
  std::vector<nn::Var> features(const nn::Var& image) const override;

 private:
  Vgg16Extractor() = default;
  std::vector<std::pair<nn::Var, nn::Var>> convs_;
};

/// "random" (seeded pyramid) or "vgg16:<path>".
std::unique_ptr<PerceptualExtractor> make_perceptual_extractor(const std::string& spec);

/// Feature maps of one image, no gradient.
std::vector<nn::Tensor> perceptual_features(const PerceptualExtractor& extractor, const nn::Tensor& image);

}  // namespace emoface::texture_gen
