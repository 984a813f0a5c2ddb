#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "emoface/audio/features.hpp"
#include "emoface/geometry/landmarks.hpp"
#include "emoface/landmark_gen/emotion.hpp"
#include "emoface/landmark_gen/graph_conv.hpp"
#include "emoface/nn/layers.hpp"

namespace emoface::landmark_gen {

struct GLConfig {
  int lstm_hidden = 256;
  int lstm_layers = 3;
  int feature_dim = 128;
  /// Widths of the three vertex-level encoder layers.
  std::array<int, 3> graph_widths = {32, 64, 128};
  std::uint64_t seed = 0;
};

/// Encoder activations reused by the decoder through additive skips.
struct GraphEncoding {
  nn::Var f_l;                          // [B, 128]
  std::array<nn::Var, 3> vertex_skips;  // [B, 68, w_k]
  nn::Var region_skip;                  // [B, 8, 128]
};

/// Audio + emotion + neutral landmarks -> per-frame landmark displacements.
///
/// Every layer runs on the Delaunay graph of the topology template, so the
/// learned edge weights refer to a fixed vertex ordering.
class GLModel {
 public:
  explicit GLModel(const GLConfig& config = {});
  GLModel(const GLConfig& config, const geometry::LandmarkSet& topology_template);

  GLModel(const GLModel&) = delete;
  GLModel& operator=(const GLModel&) = delete;
  GLModel(GLModel&&) = default;
  GLModel& operator=(GLModel&&) = default;

  /// Independent copy with identical parameter values.
  GLModel clone() const;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  const GLConfig& config() const { return config_; }
  const geometry::LandmarkSet& topology_template() const { return template_; }
  const GraphOperator& face_operator() const { return *face_op_; }

  /// audio [6T, B, 29]: the six window rows of every frame in order.
  /// Returns f_a [T, B, 128], causal in t.
  nn::Var encode_audio(const nn::Tensor& audio) const;
  /// e [B, 8] -> f_e [B, 128].
  nn::Var encode_emotion(const nn::Tensor& emotion) const;
  /// x [B, 68, 2] canonical coordinates.
  GraphEncoding encode_graph(const nn::Tensor& x) const;
  /// All inputs share the leading batch size M; returns delta [M, 68, 2].
  nn::Var decode(const nn::Var& f_a, const nn::Var& f_l, const nn::Var& f_e, const GraphEncoding& skips) const;

  /// Predicted landmarks [T, B, 68, 2] = neutral + delta for every frame.
  nn::Var forward(const nn::Tensor& audio, const nn::Tensor& neutral, const nn::Tensor& emotion) const;

 private:
  GLConfig config_;
  geometry::LandmarkSet template_;
  std::shared_ptr<const GraphOperator> face_op_, region_op_;
  nn::ParameterSet params_;
  nn::LstmStack lstm_;
  nn::Linear audio_head_, emotion_encoder_, fuse_;
  std::array<GraphConvLayer, 3> enc_;
  GraphConvLayer enc_region_, dec_region_;
  std::array<GraphConvLayer, 3> dec_;
};

/// Conditional realism critic over landmark graphs.
class GraphDiscriminator {
 public:
  explicit GraphDiscriminator(std::uint64_t seed = 1);
  GraphDiscriminator(std::uint64_t seed, const geometry::LandmarkSet& topology_template);

  GraphDiscriminator(const GraphDiscriminator&) = delete;
  GraphDiscriminator& operator=(const GraphDiscriminator&) = delete;
  GraphDiscriminator(GraphDiscriminator&&) = default;
  GraphDiscriminator& operator=(GraphDiscriminator&&) = default;

  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  /// x [M, 68, 2], emotion [M, 8] -> scores [M, 1].
  nn::Var score(const nn::Var& x, const nn::Tensor& emotion) const;

 private:
  std::shared_ptr<const GraphOperator> face_op_, region_op_;
  nn::ParameterSet params_;
  std::array<GraphConvLayer, 2> conv_;
  GraphConvLayer region_conv_;
  nn::Linear emotion_, hidden_, out_;
};

/// Repeats x [B, ...] to [T * B, ...] (frame-major).
nn::Var repeat_frames(const nn::Var& x, int frames);

/// LSTM input layout [6T, B, 29] for a batch of window sequences, frames
/// [start_b, start_b + length).
nn::Tensor audio_input(const std::vector<const audio::FeatureWindowSequence*>& windows,
                       const std::vector<std::size_t>& starts, std::size_t length);
/// Landmarks -> [B, 68, 2].
nn::Tensor landmark_batch(const std::vector<geometry::LandmarkSet>& items);

/// Encodes one graph: f_l [1, 128] and skips.
GraphEncoding encode_graph(const GLModel& model, const geometry::LandmarkSet& landmarks);
/// windows -> [T, 128] audio embeddings.
nn::Tensor encode_audio(const GLModel& model, const audio::FeatureWindowSequence& windows);
/// e -> [128].
nn::Tensor encode_emotion(const GLModel& model, const EmotionVector& e);
/// base + decoder(f_a, f_l, f_e, skips) for a single frame.
geometry::LandmarkSet decode_landmarks(const GLModel& model, const nn::Tensor& f_a, const nn::Tensor& f_l,
                                       const nn::Tensor& f_e, const GraphEncoding& skips,
                                       const geometry::LandmarkSet& base);

/// Canonical-frame landmark sequence, one frame per window. Thread-safe.
std::vector<geometry::LandmarkSet> infer_landmark_sequence(const GLModel& model,
                                                           const audio::FeatureWindowSequence& windows,
                                                           const geometry::LandmarkSet& neutral,
                                                           const EmotionVector& emotion);

}  // namespace emoface::landmark_gen
