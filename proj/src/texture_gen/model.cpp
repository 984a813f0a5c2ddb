#include "emoface/texture_gen/model.hpp"

#include "emoface/errors.hpp"
#include "emoface/geometry/heatmap.hpp"
#include "emoface/nn/ops.hpp"

namespace emoface::texture_gen {

using nn::Tensor;
using nn::Var;

namespace {
constexpr int kHeatmapChannels = geometry::kNumLandmarks + 1;
}

GTModel::GTModel(const GTConfig& config) : config_(config) {
  if (config.resolution < 16 || config.resolution % 16 != 0) {
    throw ContractError("texture resolution must be a positive multiple of 16");
  }
  if (config.base_width < 1) throw ContractError("base width must be positive");
  nn::Rng rng(config.seed);
  const int b = config.base_width;
  auto conv = [&](const std::string& name, int in, int out, int stride, nn::Init init = nn::Init::kUniformFanIn) {
    return nn::Conv2d(params_, name, in, out, 3, stride, 1, rng, init);
  };
  id1_ = conv("identity_encoder.conv1", 3, b, 1);
  id2_ = conv("identity_encoder.conv2", b, 2 * b, 2);
  id3_ = conv("identity_encoder.conv3", 2 * b, 4 * b, 2);
  emotion_ = nn::Linear(params_, "emotion_encoder", landmark_gen::kEmotionDim, config.emotion_dim, rng,
                        nn::Init::kUniformFanIn, true);
  me1_ = conv("motion_encoder.conv1", kHeatmapChannels + 4 * b, 8 * b, 1);
  me2_ = conv("motion_encoder.conv2", 8 * b, 16 * b, 2);
  me3_ = conv("motion_encoder.conv3", 16 * b, 16 * b, 2);
  md_in_ = conv("motion_decoder.conv_in", 16 * b + config.emotion_dim, 16 * b, 1);
  md_up2_ = conv("motion_decoder.up2", 32 * b, 8 * b, 1);
  md_up1_ = conv("motion_decoder.up1", 16 * b, 4 * b, 1);
  flow_head_ = conv("motion_decoder.flow", 4 * b, 2, 1, nn::Init::kZero);
  occ_head_ = conv("motion_decoder.occlusion", 4 * b, 1, 1, nn::Init::kZero);
  dt_in_ = conv("image_decoder.conv_in", 3, 4 * b, 1);
  dt_mid_ = conv("image_decoder.conv_mid", 4 * b, 4 * b, 1);
  dt_up2_ = conv("image_decoder.up2", 4 * b, 2 * b, 1);
  dt_up1_ = conv("image_decoder.up1", 2 * b, b, 1);
  dt_out_ = conv("image_decoder.out", b, 3, 1);
}

GTModel GTModel::clone() const {
  GTModel copy(config_);
  copy.params_.load_state(params_.state());
  return copy;
}

const std::vector<std::string>& GTModel::adaptation_scope() {
  static const std::vector<std::string> scope = {"identity_encoder.", "image_decoder."};
  return scope;
}

IdentityFeatures GTModel::encode_identity(const Var& image) const {
  const int r = config_.resolution;
  if (image.value().ndim() != 4 || image.dim(1) != 3 || image.dim(2) != r || image.dim(3) != r) {
    throw ContractError("encode_identity: expected [N, 3, " + std::to_string(r) + ", " + std::to_string(r) +
                        "], got " + nn::shape_string(image.shape()));
  }
  IdentityFeatures f;
  f.e1 = nn::leaky_relu(id1_(image));
  f.e2 = nn::leaky_relu(id2_(f.e1));
  f.e3 = nn::leaky_relu(id3_(f.e2));
  f.mean = nn::channel_mean(f.e3);
  f.std = nn::channel_std(f.e3);
  return f;
}

Var GTModel::encode_emotion(const Tensor& emotion) const {
  if (emotion.ndim() != 2 || emotion.dim(1) != landmark_gen::kEmotionDim) {
    throw ContractError("encode_emotion: expected [N, 8]");
  }
  return emotion_(nn::constant(emotion));
}

MotionField GTModel::predict_motion(const Var& f_h, const IdentityFeatures& identity, const Var& f_e) const {
  const int h = config_.heatmap_resolution();
  if (f_h.value().ndim() != 4 || f_h.dim(1) != kHeatmapChannels || f_h.dim(2) != h || f_h.dim(3) != h) {
    throw ContractError("predict_motion: heatmap difference must be [N, 69, " + std::to_string(h) + ", " +
                        std::to_string(h) + "]");
  }
  Var m1 = nn::leaky_relu(me1_(nn::concat({f_h, identity.e3}, 1)));
  Var m2 = nn::leaky_relu(me2_(m1));
  Var f_m = nn::leaky_relu(me3_(m2));
  Var e = nn::broadcast_spatial(f_e, f_m.dim(2), f_m.dim(3));
  Var d = nn::leaky_relu(md_in_(nn::concat({f_m, e}, 1)));
  d = nn::leaky_relu(md_up2_(nn::concat({nn::upsample_nearest2x(d), m2}, 1)));
  d = nn::leaky_relu(md_up1_(nn::concat({nn::upsample_nearest2x(d), m1}, 1)));
  return {nn::tanh(flow_head_(d)), nn::sigmoid(occ_head_(d))};
}

Var GTModel::decode_frame(const MotionField& motion, const IdentityFeatures& identity) const {
  auto guided = [](const Var& skip, const Var& flow, const Var& occ) {
    const int hh = skip.dim(2), ww = skip.dim(3);
    Var f = flow.dim(2) == hh ? flow : nn::resize_bilinear(flow, hh, ww);
    Var o = occ.dim(2) == hh ? occ : nn::resize_bilinear(occ, hh, ww);
    return nn::mul_channels(nn::grid_warp(skip, f), o);
  };
  Var h = dt_in_(nn::concat({motion.flow, motion.occlusion}, 1));
  h = nn::scale_shift_channels(nn::instance_normalize(h), identity.std, identity.mean);
  h = nn::add(nn::leaky_relu(h), guided(identity.e3, motion.flow, motion.occlusion));
  h = nn::leaky_relu(dt_mid_(h));
  h = nn::leaky_relu(dt_up2_(nn::upsample_nearest2x(h)));
  h = nn::add(h, guided(identity.e2, motion.flow, motion.occlusion));
  h = nn::leaky_relu(dt_up1_(nn::upsample_nearest2x(h)));
  h = nn::add(h, guided(identity.e1, motion.flow, motion.occlusion));
  return nn::tanh(dt_out_(h));
}

Var GTModel::forward(const Tensor& identity, const Tensor& f_h, const Tensor& emotion) const {
  const IdentityFeatures id = encode_identity(nn::constant(identity));
  const MotionField motion = predict_motion(nn::constant(f_h), id, encode_emotion(emotion));
  return decode_frame(motion, id);
}

FrameDiscriminator::FrameDiscriminator(int base_width, std::uint64_t seed) {
  nn::Rng rng(seed);
  const int b = base_width;
  c1_ = nn::Conv2d(params_, "frame_disc.conv1", 3, b, 3, 2, 1, rng);
  c2_ = nn::Conv2d(params_, "frame_disc.conv2", b, 2 * b, 3, 2, 1, rng);
  c3_ = nn::Conv2d(params_, "frame_disc.conv3", 2 * b, 4 * b, 3, 2, 1, rng);
  out_ = nn::Conv2d(params_, "frame_disc.out", 4 * b, 1, 3, 1, 1, rng);
}

Var FrameDiscriminator::logits(const Var& image) const {
  Var h = nn::leaky_relu(c1_(image));
  h = nn::leaky_relu(c2_(h));
  h = nn::leaky_relu(c3_(h));
  return out_(h);
}

Tensor batched(const Tensor& x) {
  nn::Shape s = x.shape();
  s.insert(s.begin(), 1);
  return x.reshaped(s);
}

Tensor unbatched(const Tensor& x) {
  if (x.ndim() < 1 || x.dim(0) != 1) throw ContractError("unbatched: leading dimension must be 1");
  nn::Shape s(x.shape().begin() + 1, x.shape().end());
  return x.reshaped(s);
}

Tensor warp(const Tensor& x, const Tensor& flow) {
  if (x.ndim() != 3 || flow.ndim() != 3 || flow.dim(0) != 2 || x.dim(1) != flow.dim(1) || x.dim(2) != flow.dim(2)) {
    throw ContractError("warp: expected x [C, h, w] and flow [2, h, w] with matching h, w");
  }
  nn::NoGradGuard guard;
  return unbatched(nn::grid_warp(nn::constant(batched(x)), nn::constant(batched(flow))).value());
}

Tensor heatmap_input(const GTConfig& config, const geometry::FaceGraph& g_in, const geometry::FaceGraph& g_out) {
  const int r = config.resolution, h = config.heatmap_resolution();
  auto on_grid = [&](const geometry::FaceGraph& g) {
    return geometry::with_positions(g, geometry::to_grid(g.vertices, r, r, h, h));
  };
  return geometry::heatmap_difference(on_grid(g_in), on_grid(g_out), h, h, config.heatmap_sigma);
}

Tensor generate_frame(const GTModel& model, const Tensor& identity, const geometry::FaceGraph& g_in,
                      const geometry::FaceGraph& g_out, const landmark_gen::EmotionVector& e) {
  nn::NoGradGuard guard;
  const Tensor f_h = heatmap_input(model.config(), g_in, g_out);
  return unbatched(model.forward(batched(identity), batched(f_h), landmark_gen::emotion_batch({e})).value());
}

}  // namespace emoface::texture_gen
