#include "emoface/texture_gen/perceptual.hpp"

#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/ops.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::texture_gen {

using nn::Tensor;
using nn::Var;

RandomPyramidExtractor::RandomPyramidExtractor(std::uint64_t seed, int channels) {
  nn::Rng rng(seed);
  int in = 3;
  for (int level = 0; level < 4; ++level) {
    const int out = channels << level;
    Tensor w({out, in, 3, 3});
    const double bound = std::sqrt(6.0 / (in * 9.0));
    for (auto& v : w.values()) v = static_cast<float>(rng.uniform(-bound, bound));
    Tensor b({out});
    for (auto& v : b.values()) v = static_cast<float>(rng.uniform(-0.1, 0.1));
    weights_.push_back(nn::constant(std::move(w)));
    biases_.push_back(nn::constant(std::move(b)));
    in = out;
  }
}

std::vector<Var> RandomPyramidExtractor::features(const Var& image) const {
  std::vector<Var> out;
  Var h = image;
  for (std::size_t level = 0; level < weights_.size(); ++level) {
    if (level > 0) h = nn::avg_pool2x(h);
    h = nn::leaky_relu(nn::conv2d(h, weights_[level], biases_[level], 1, 1));
    out.push_back(h);
  }
  return out;
}

namespace {
constexpr int kVggBlocks[4] = {2, 2, 3, 3};
}

std::unique_ptr<Vgg16Extractor> Vgg16Extractor::load(const std::filesystem::path& weights) {
  if (!std::filesystem::exists(weights)) {
    throw ConfigError("perceptual backend vgg16: weight file not found: " + weights.string());
  }
  const nn::Archive archive = nn::load_archive(weights);
  std::unique_ptr<Vgg16Extractor> ex(new Vgg16Extractor());
  for (int block = 0; block < 4; ++block) {
    for (int layer = 0; layer < kVggBlocks[block]; ++layer) {
      const std::string name = "conv" + std::to_string(block + 1) + "_" + std::to_string(layer + 1);
      if (!archive.has_tensor(name + ".weight") || !archive.has_tensor(name + ".bias")) {
        throw ConfigError("perceptual backend vgg16: missing tensor " + name);
      }
      ex->convs_.emplace_back(nn::constant(archive.tensor(name + ".weight")), nn::constant(archive.tensor(name + ".bias")));
    }
  }
  return ex;
}

std::vector<Var> Vgg16Extractor::features(const Var& image) const {
  // [-1, 1] -> ImageNet-normalized RGB.
  static constexpr float kMean[3] = {0.485f, 0.456f, 0.406f};
  static constexpr float kStd[3] = {0.229f, 0.224f, 0.225f};
  const int n = image.dim(0);
  Tensor scale({n, 3}), shift({n, 3});
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < 3; ++c) {
      scale.at(b, c) = 0.5f / kStd[c];
      shift.at(b, c) = (0.5f - kMean[c]) / kStd[c];
    }
  }
  Var h = nn::scale_shift_channels(image, nn::constant(scale), nn::constant(shift));
  std::vector<Var> out;
  std::size_t k = 0;
  for (int block = 0; block < 4; ++block) {
    if (block > 0) h = nn::max_pool2x(h);
    for (int layer = 0; layer < kVggBlocks[block]; ++layer, ++k) {
      h = nn::relu(nn::conv2d(h, convs_[k].first, convs_[k].second, 1, 1));
    }
    out.push_back(h);
  }
  return out;
}

std::unique_ptr<PerceptualExtractor> make_perceptual_extractor(const std::string& spec) {
  if (spec.empty() || spec == "random") return std::make_unique<RandomPyramidExtractor>();
  if (spec.starts_with("vgg16:")) return Vgg16Extractor::load(spec.substr(6));
  if (spec == "vgg16") throw ConfigError("perceptual backend vgg16 needs a weight path (vgg16:<file>)");
  throw ConfigError("unknown perceptual backend: " + spec);
}

std::vector<Tensor> perceptual_features(const PerceptualExtractor& extractor, const Tensor& image) {
  nn::NoGradGuard guard;
  nn::Shape s = image.shape();
  if (s.size() == 3) s.insert(s.begin(), 1);
  std::vector<Tensor> out;
  for (const auto& f : extractor.features(nn::constant(image.reshaped(s)))) out.push_back(f.value());
  return out;
}

}  // namespace emoface::texture_gen
