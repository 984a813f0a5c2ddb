#include "emoface/pipeline/checkpoint.hpp"

#include <charconv>

#include "emoface/errors.hpp"

namespace emoface::pipeline {

namespace {

constexpr const char* kGenerator = "generator.";
constexpr const char* kDiscriminator = "discriminator.";

template <typename T>
std::string num(T v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
T meta_num(const nn::Archive& a, const std::string& key) {
  const std::string v = a.meta(key);
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("checkpoint: missing or malformed metadata '" + key + "'");
  }
  return out;
}

void append(nn::StateDict& out, const nn::ParameterSet& params, const std::string& prefix) {
  for (auto& [name, t] : params.state()) out.emplace_back(prefix + name, t);
}

// Loads the tensors under `prefix`; returns false when none are present.
bool extract(const nn::Archive& a, nn::ParameterSet& params, const std::string& prefix) {
  nn::StateDict part;
  for (const auto& [name, t] : a.tensors)
    if (name.rfind(prefix, 0) == 0) part.emplace_back(name.substr(prefix.size()), t);
  if (part.empty()) return false;
  if (part.size() != params.size()) {
    throw ConfigError("checkpoint: expected " + std::to_string(params.size()) + " tensors under '" + prefix +
                      "', found " + std::to_string(part.size()));
  }
  params.load_state(part);
  return true;
}

void expect_kind(const nn::Archive& a, const std::string& kind) {
  if (a.meta("kind") != kind) {
    throw ConfigError("checkpoint holds '" + a.meta("kind") + "', expected '" + kind + "'");
  }
}

}  // namespace

nn::Archive landmark_archive(const landmark_gen::GLModel& model, const landmark_gen::GraphDiscriminator* disc) {
  const auto& c = model.config();
  nn::Archive a;
  a.metadata = {{"kind", "landmark_generator"},
                {"gl.lstm_hidden", num(c.lstm_hidden)},
                {"gl.lstm_layers", num(c.lstm_layers)},
                {"gl.feature_dim", num(c.feature_dim)},
                {"gl.width0", num(c.graph_widths[0])},
                {"gl.width1", num(c.graph_widths[1])},
                {"gl.width2", num(c.graph_widths[2])},
                {"gl.seed", num(c.seed)},
                {"template", geometry::format_landmark_line(model.topology_template())}};
  append(a.tensors, model.parameters(), kGenerator);
  if (disc) append(a.tensors, disc->parameters(), kDiscriminator);
  return a;
}

LandmarkCheckpoint landmark_from_archive(const nn::Archive& a) {
  expect_kind(a, "landmark_generator");
  landmark_gen::GLConfig c;
  c.lstm_hidden = meta_num<int>(a, "gl.lstm_hidden");
  c.lstm_layers = meta_num<int>(a, "gl.lstm_layers");
  c.feature_dim = meta_num<int>(a, "gl.feature_dim");
  c.graph_widths = {meta_num<int>(a, "gl.width0"), meta_num<int>(a, "gl.width1"), meta_num<int>(a, "gl.width2")};
  c.seed = meta_num<std::uint64_t>(a, "gl.seed");
  geometry::LandmarkSet tmpl;
  try {
    tmpl = geometry::parse_landmark_line(a.meta("template"), true, 1);
  } catch (const FormatError& e) {
    throw ConfigError(std::string("checkpoint: bad topology template: ") + e.what());
  }
  LandmarkCheckpoint out{landmark_gen::GLModel(c, tmpl), std::nullopt};
  if (!extract(a, out.model.parameters(), kGenerator)) throw ConfigError("checkpoint: no generator tensors");
  landmark_gen::GraphDiscriminator disc(1, tmpl);
  if (extract(a, disc.parameters(), kDiscriminator)) out.discriminator.emplace(std::move(disc));
  return out;
}

void save_landmark_checkpoint(const std::filesystem::path& path, const landmark_gen::GLModel& model,
                              const landmark_gen::GraphDiscriminator* disc) {
  nn::save_archive(path, landmark_archive(model, disc));
}

LandmarkCheckpoint load_landmark_checkpoint(const std::filesystem::path& path) {
  return landmark_from_archive(nn::load_archive(path));
}

nn::Archive texture_archive(const texture_gen::GTModel& model, const texture_gen::FrameDiscriminator* disc) {
  const auto& c = model.config();
  nn::Archive a;
  a.metadata = {{"kind", "texture_generator"},
                {"gt.resolution", num(c.resolution)},
                {"gt.base_width", num(c.base_width)},
                {"gt.emotion_dim", num(c.emotion_dim)},
                {"gt.heatmap_sigma", num(c.heatmap_sigma)},
                {"gt.seed", num(c.seed)}};
  append(a.tensors, model.parameters(), kGenerator);
  if (disc) append(a.tensors, disc->parameters(), kDiscriminator);
  return a;
}

TextureCheckpoint texture_from_archive(const nn::Archive& a) {
  expect_kind(a, "texture_generator");
  texture_gen::GTConfig c;
  c.resolution = meta_num<int>(a, "gt.resolution");
  c.base_width = meta_num<int>(a, "gt.base_width");
  c.emotion_dim = meta_num<int>(a, "gt.emotion_dim");
  c.heatmap_sigma = meta_num<double>(a, "gt.heatmap_sigma");
  c.seed = meta_num<std::uint64_t>(a, "gt.seed");
  TextureCheckpoint out{texture_gen::GTModel(c), std::nullopt};
  if (!extract(a, out.model.parameters(), kGenerator)) throw ConfigError("checkpoint: no generator tensors");
  texture_gen::FrameDiscriminator disc(c.base_width);
  if (extract(a, disc.parameters(), kDiscriminator)) out.discriminator.emplace(std::move(disc));
  return out;
}

void save_texture_checkpoint(const std::filesystem::path& path, const texture_gen::GTModel& model,
                             const texture_gen::FrameDiscriminator* disc) {
  nn::save_archive(path, texture_archive(model, disc));
}

TextureCheckpoint load_texture_checkpoint(const std::filesystem::path& path) {
  return texture_from_archive(nn::load_archive(path));
}

}  // namespace emoface::pipeline
