#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emoface/geometry/face_graph.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/nn/layers.hpp"

namespace emoface::texture_gen {

/// Layer widths are multiples of `base_width`: the identity encoder emits
/// base, 2*base and 4*base channels at full, 1/2 and 1/4 resolution.
struct GTConfig {
  int resolution = 64;
  int base_width = 8;
  int emotion_dim = 128;
  /// Gaussian std of the landmark heatmaps, in heatmap pixels.
  double heatmap_sigma = 1.0;
  std::uint64_t seed = 0;

  int heatmap_resolution() const { return resolution / 4; }
};

/// Identity-encoder activations: skips at three scales plus the per-channel
/// statistics of the deepest one for adaptive instance normalization.
struct IdentityFeatures {
  nn::Var e1, e2, e3;  // e3 is f_t
  nn::Var mean, std;   // [N, 4 * base]
};

/// flow [N, 2, h, w] in normalized [-1, 1] coordinates (tanh);
/// occlusion [N, 1, h, w] in [0, 1] (sigmoid).
struct MotionField {
  nn::Var flow;
  nn::Var occlusion;
};

class GTModel {
 public:
  explicit GTModel(const GTConfig& config = {});

  GTModel(const GTModel&) = delete;
  GTModel& operator=(const GTModel&) = delete;
  GTModel(GTModel&&) = default;
  GTModel& operator=(GTModel&&) = default;

  GTModel clone() const;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  const GTConfig& config() const { return config_; }

  /// Parameter-name prefixes updated by one-shot adaptation.
  static const std::vector<std::string>& adaptation_scope();

  /// image [N, 3, R, R] in [-1, 1].
  IdentityFeatures encode_identity(const nn::Var& image) const;
  /// e [N, 8] -> [N, emotion_dim].
  nn::Var encode_emotion(const nn::Tensor& emotion) const;
  /// f_h [N, 69, R/4, R/4].
  MotionField predict_motion(const nn::Var& f_h, const IdentityFeatures& identity, const nn::Var& f_e) const;
  /// Output frame [N, 3, R, R] in [-1, 1].
  nn::Var decode_frame(const MotionField& motion, const IdentityFeatures& identity) const;

  /// Full generator: identity image, heatmap difference, emotion.
  nn::Var forward(const nn::Tensor& identity, const nn::Tensor& f_h, const nn::Tensor& emotion) const;

 private:
  GTConfig config_;
  nn::ParameterSet params_;
  nn::Conv2d id1_, id2_, id3_;
  nn::Linear emotion_;
  nn::Conv2d me1_, me2_, me3_;
  nn::Conv2d md_in_, md_up2_, md_up1_, flow_head_, occ_head_;
  nn::Conv2d dt_in_, dt_mid_, dt_up2_, dt_up1_, dt_out_;
};

/// Patch critic returning logits [N, 1, R/8, R/8].
class FrameDiscriminator {
 public:
  FrameDiscriminator(int base_width = 8, std::uint64_t seed = 1);

  FrameDiscriminator(const FrameDiscriminator&) = delete;
  FrameDiscriminator& operator=(const FrameDiscriminator&) = delete;
  FrameDiscriminator(FrameDiscriminator&&) = default;
  FrameDiscriminator& operator=(FrameDiscriminator&&) = default;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  nn::Var logits(const nn::Var& image) const;

 private:
  nn::ParameterSet params_;
  nn::Conv2d c1_, c2_, c3_, out_;
};

/// Bilinear backward warp of x [C, h, w] by flow [2, h, w] (normalized
/// coordinates, border replication).
nn::Tensor warp(const nn::Tensor& x, const nn::Tensor& flow);

/// Heatmap difference for graphs in image-pixel coordinates of an R x R
/// frame, rendered on the model's heatmap grid: [69, R/4, R/4].
nn::Tensor heatmap_input(const GTConfig& config, const geometry::FaceGraph& g_in, const geometry::FaceGraph& g_out);

/// heatmap_difference -> predict_motion -> decode_frame for one frame.
/// identity [3, R, R]; returns [3, R, R]. Thread-safe.
nn::Tensor generate_frame(const GTModel& model, const nn::Tensor& identity, const geometry::FaceGraph& g_in,
                          const geometry::FaceGraph& g_out, const landmark_gen::EmotionVector& e);

/// Adds a leading batch axis of 1 / removes it.
nn::Tensor batched(const nn::Tensor& x);
nn::Tensor unbatched(const nn::Tensor& x);

}  // namespace emoface::texture_gen
