#include "emoface/landmark_gen/model.hpp"

#include "emoface/errors.hpp"
#include "emoface/geometry/alignment.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::landmark_gen {

using nn::Tensor;
using nn::Var;

namespace {

struct Operators {
  std::shared_ptr<const GraphOperator> face, region;
};

Operators make_operators(const geometry::LandmarkSet& tmpl) {
  const auto graph = geometry::build_face_graph(tmpl);
  const auto& partition = geometry::standard_partition();
  return {std::make_shared<const GraphOperator>(GraphOperator::from_graph(graph)),
          std::make_shared<const GraphOperator>(
              GraphOperator::from_adjacency(geometry::region_adjacency(graph, partition), geometry::kNumRegions))};
}

}  // namespace

GLModel::GLModel(const GLConfig& config) : GLModel(config, geometry::canonical_template()) {}

GLModel::GLModel(const GLConfig& config, const geometry::LandmarkSet& topology_template)
    : config_(config), template_(topology_template) {
  const auto ops = make_operators(template_);
  face_op_ = ops.face;
  region_op_ = ops.region;
  nn::Rng rng(config.seed);
  const int d = config.feature_dim;
  const auto& w = config.graph_widths;
  lstm_ = nn::LstmStack(params_, "audio_encoder.lstm", audio::kNumChannels, config.lstm_hidden, config.lstm_layers, rng);
  audio_head_ = nn::Linear(params_, "audio_encoder.head", config.lstm_hidden, d, rng);
  emotion_encoder_ = nn::Linear(params_, "emotion_encoder", kEmotionDim, d, rng, nn::Init::kUniformFanIn, true);
  const int in_widths[3] = {2, w[0], w[1]};
  for (int k = 0; k < 3; ++k) {
    enc_[static_cast<std::size_t>(k)] = GraphConvLayer(params_, "graph_encoder.conv" + std::to_string(k), *face_op_,
                                                       in_widths[k], w[static_cast<std::size_t>(k)],
                                                       Activation::kLeakyRelu, rng);
  }
  enc_region_ = GraphConvLayer(params_, "graph_encoder.region", *region_op_, w[2], d, Activation::kLeakyRelu, rng);
  fuse_ = nn::Linear(params_, "graph_decoder.fuse", 3 * d, d, rng);
  dec_region_ = GraphConvLayer(params_, "graph_decoder.region", *region_op_, d, w[2], Activation::kLeakyRelu, rng);
  dec_[0] = GraphConvLayer(params_, "graph_decoder.conv0", *face_op_, w[2], w[1], Activation::kLeakyRelu, rng);
  dec_[1] = GraphConvLayer(params_, "graph_decoder.conv1", *face_op_, w[1], w[0], Activation::kLeakyRelu, rng);
  dec_[2] = GraphConvLayer(params_, "graph_decoder.out", *face_op_, w[0], 2, Activation::kIdentity, rng, nn::Init::kZero);
}

GLModel GLModel::clone() const {
  GLModel copy(config_, template_);
  copy.params_.load_state(params_.state());
  return copy;
}

Var GLModel::encode_audio(const Tensor& audio) const {
  if (audio.ndim() != 3 || audio.dim(0) % audio::kWindow != 0 || audio.dim(0) == 0 ||
      audio.dim(2) != audio::kNumChannels) {
    throw ContractError("encode_audio: expected [6T, B, 29], got " + nn::shape_string(audio.shape()));
  }
  const int t = audio.dim(0) / audio::kWindow, b = audio.dim(1), h = config_.lstm_hidden;
  Var states = lstm_(nn::constant(audio));
  // The state after the last row of each window summarizes frame t.
  states = nn::reshape(states, {t, audio::kWindow, b * h});
  states = nn::reshape(nn::slice(states, 1, audio::kWindow - 1, 1), {t * b, h});
  return nn::reshape(audio_head_(states), {t, b, config_.feature_dim});
}

Var GLModel::encode_emotion(const Tensor& emotion) const {
  if (emotion.ndim() != 2 || emotion.dim(1) != kEmotionDim) {
    throw ContractError("encode_emotion: expected [B, 8], got " + nn::shape_string(emotion.shape()));
  }
  return emotion_encoder_(nn::constant(emotion));
}

GraphEncoding GLModel::encode_graph(const Tensor& x) const {
  if (x.ndim() != 3 || x.dim(1) != geometry::kNumLandmarks || x.dim(2) != 2) {
    throw ContractError("encode_graph: expected [B, 68, 2], got " + nn::shape_string(x.shape()));
  }
  GraphEncoding out;
  Var h = nn::add_scalar(nn::constant(x), -0.5f);
  for (std::size_t k = 0; k < 3; ++k) {
    h = enc_[k](h);
    out.vertex_skips[k] = h;
  }
  out.region_skip = enc_region_(graph_pool(h, geometry::standard_partition()));
  out.f_l = nn::mean_nodes(out.region_skip);
  return out;
}

Var GLModel::decode(const Var& f_a, const Var& f_l, const Var& f_e, const GraphEncoding& skips) const {
  Var h = nn::leaky_relu(fuse_(nn::concat({f_a, f_l, f_e}, 1)));
  Var r = nn::add(nn::broadcast_nodes(h, geometry::kNumRegions), skips.region_skip);
  r = dec_region_(r);
  Var v = nn::add(graph_unpool(r, geometry::standard_partition(), geometry::kNumLandmarks), skips.vertex_skips[2]);
  v = nn::add(dec_[0](v), skips.vertex_skips[1]);
  v = nn::add(dec_[1](v), skips.vertex_skips[0]);
  return dec_[2](v);
}

Var repeat_frames(const Var& x, int frames) {
  nn::Shape out_shape = x.shape();
  const int rest = static_cast<int>(x.value().numel());
  out_shape[0] *= frames;
  Var flat = nn::reshape(x, {1, rest});
  return nn::reshape(nn::broadcast_nodes(flat, frames), out_shape);
}

Var GLModel::forward(const Tensor& audio, const Tensor& neutral, const Tensor& emotion) const {
  const int t = audio.dim(0) / audio::kWindow, b = audio.dim(1);
  if (neutral.ndim() != 3 || neutral.dim(0) != b || emotion.dim(0) != b) {
    throw ContractError("GLModel::forward: batch sizes disagree");
  }
  Var f_a = nn::reshape(encode_audio(audio), {t * b, config_.feature_dim});
  GraphEncoding enc = encode_graph(neutral);
  GraphEncoding rep;
  rep.f_l = repeat_frames(enc.f_l, t);
  for (std::size_t k = 0; k < 3; ++k) rep.vertex_skips[k] = repeat_frames(enc.vertex_skips[k], t);
  rep.region_skip = repeat_frames(enc.region_skip, t);
  Var f_e = repeat_frames(encode_emotion(emotion), t);
  Var delta = decode(f_a, rep.f_l, f_e, rep);
  Var base = repeat_frames(nn::constant(neutral), t);
  return nn::reshape(nn::add(base, delta), {t, b, geometry::kNumLandmarks, 2});
}

GraphDiscriminator::GraphDiscriminator(std::uint64_t seed) : GraphDiscriminator(seed, geometry::canonical_template()) {}

GraphDiscriminator::GraphDiscriminator(std::uint64_t seed, const geometry::LandmarkSet& topology_template) {
  const auto ops = make_operators(topology_template);
  face_op_ = ops.face;
  region_op_ = ops.region;
  nn::Rng rng(seed);
  conv_[0] = GraphConvLayer(params_, "disc.conv0", *face_op_, 2, 32, Activation::kLeakyRelu, rng);
  conv_[1] = GraphConvLayer(params_, "disc.conv1", *face_op_, 32, 64, Activation::kLeakyRelu, rng);
  region_conv_ = GraphConvLayer(params_, "disc.region", *region_op_, 64, 128, Activation::kLeakyRelu, rng);
  emotion_ = nn::Linear(params_, "disc.emotion", kEmotionDim, 128, rng);
  hidden_ = nn::Linear(params_, "disc.hidden", 256, 128, rng);
  out_ = nn::Linear(params_, "disc.out", 128, 1, rng);
}

Var GraphDiscriminator::score(const Var& x, const Tensor& emotion) const {
  Var h = conv_[1](conv_[0](nn::add_scalar(x, -0.5f)));
  Var g = nn::mean_nodes(region_conv_(graph_pool(h, geometry::standard_partition())));
  Var z = nn::concat({g, emotion_(nn::constant(emotion))}, 1);
  return out_(nn::leaky_relu(hidden_(z)));
}

Tensor audio_input(const std::vector<const audio::FeatureWindowSequence*>& windows,
                   const std::vector<std::size_t>& starts, std::size_t length) {
  const int b_count = static_cast<int>(windows.size());
  if (starts.size() != windows.size()) throw ContractError("audio_input: one start per sequence required");
  Tensor out({static_cast<int>(length) * audio::kWindow, b_count, audio::kNumChannels});
  for (int b = 0; b < b_count; ++b) {
    const auto& w = windows[static_cast<std::size_t>(b)]->windows;
    if (starts[static_cast<std::size_t>(b)] + length > static_cast<std::size_t>(w.dim(0))) {
      throw ContractError("audio_input: crop exceeds sequence length");
    }
    for (std::size_t t = 0; t < length; ++t) {
      for (int k = 0; k < audio::kWindow; ++k) {
        const float* src = w.data() + ((starts[static_cast<std::size_t>(b)] + t) * audio::kWindow + static_cast<std::size_t>(k)) *
                                          audio::kNumChannels;
        float* dst = out.data() +
                     ((t * audio::kWindow + static_cast<std::size_t>(k)) * b_count + static_cast<std::size_t>(b)) *
                         audio::kNumChannels;
        std::copy(src, src + audio::kNumChannels, dst);
      }
    }
  }
  return out;
}

Tensor landmark_batch(const std::vector<geometry::LandmarkSet>& items) {
  Tensor out({static_cast<int>(items.size()), geometry::kNumLandmarks, 2});
  for (std::size_t b = 0; b < items.size(); ++b) {
    for (int i = 0; i < geometry::kNumLandmarks; ++i) {
      out.at(static_cast<int>(b), i, 0) = static_cast<float>(items[b][i].x);
      out.at(static_cast<int>(b), i, 1) = static_cast<float>(items[b][i].y);
    }
  }
  return out;
}

GraphEncoding encode_graph(const GLModel& model, const geometry::LandmarkSet& landmarks) {
  nn::NoGradGuard guard;
  return model.encode_graph(landmark_batch({landmarks}));
}

Tensor encode_audio(const GLModel& model, const audio::FeatureWindowSequence& windows) {
  nn::NoGradGuard guard;
  const Tensor input = audio_input({&windows}, {0}, windows.frames());
  return model.encode_audio(input).value().reshaped({static_cast<int>(windows.frames()), model.config().feature_dim});
}

Tensor encode_emotion(const GLModel& model, const EmotionVector& e) {
  nn::NoGradGuard guard;
  return model.encode_emotion(emotion_batch({e})).value().reshaped({model.config().feature_dim});
}

geometry::LandmarkSet decode_landmarks(const GLModel& model, const Tensor& f_a, const Tensor& f_l, const Tensor& f_e,
                                       const GraphEncoding& skips, const geometry::LandmarkSet& base) {
  nn::NoGradGuard guard;
  const int d = model.config().feature_dim;
  for (const Tensor* t : {&f_a, &f_l, &f_e}) {
    if (t->numel() != static_cast<std::size_t>(d)) throw ContractError("decode_landmarks: features must be 128-dim");
  }
  const Var delta = model.decode(nn::constant(f_a.reshaped({1, d})), nn::constant(f_l.reshaped({1, d})),
                                 nn::constant(f_e.reshaped({1, d})), skips);
  geometry::LandmarkDelta dl{};
  for (int i = 0; i < geometry::kNumLandmarks; ++i) {
    dl[static_cast<std::size_t>(i)] = {delta.value().at(0, i, 0), delta.value().at(0, i, 1)};
  }
  return base + dl;
}

std::vector<geometry::LandmarkSet> infer_landmark_sequence(const GLModel& model,
                                                           const audio::FeatureWindowSequence& windows,
                                                           const geometry::LandmarkSet& neutral,
                                                           const EmotionVector& emotion) {
  nn::NoGradGuard guard;
  const int t = static_cast<int>(windows.frames());
  const Tensor audio = audio_input({&windows}, {0}, windows.frames());
  Var f_a = nn::reshape(model.encode_audio(audio), {t, model.config().feature_dim});
  GraphEncoding enc = model.encode_graph(landmark_batch({neutral}));
  GraphEncoding rep;
  rep.f_l = repeat_frames(enc.f_l, t);
  for (std::size_t k = 0; k < 3; ++k) rep.vertex_skips[k] = repeat_frames(enc.vertex_skips[k], t);
  rep.region_skip = repeat_frames(enc.region_skip, t);
  Var f_e = repeat_frames(model.encode_emotion(emotion_batch({emotion})), t);
  const Tensor delta = model.decode(f_a, rep.f_l, f_e, rep).value();
  std::vector<geometry::LandmarkSet> out;
  out.reserve(static_cast<std::size_t>(t));
  for (int f = 0; f < t; ++f) {
    geometry::LandmarkDelta dl{};
    for (int i = 0; i < geometry::kNumLandmarks; ++i) {
      dl[static_cast<std::size_t>(i)] = {delta.at(f, i, 0), delta.at(f, i, 1)};
    }
    out.push_back(neutral + dl);
  }
  return out;
}

}  // namespace emoface::landmark_gen
