#include "emoface/pipeline/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

#include "emoface/errors.hpp"

namespace emoface::pipeline {

namespace {

using Field = std::variant<int PipelineConfig::*, double PipelineConfig::*, std::uint64_t PipelineConfig::*,
                           std::string PipelineConfig::*, double geometry::BlinkParams::*>;

struct Key {
  const char* name;
  Field field;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"resolution", &PipelineConfig::resolution},
      {"fps", &PipelineConfig::fps},
      {"seed", &PipelineConfig::seed},
      {"gl.lstm_hidden", &PipelineConfig::gl_lstm_hidden},
      {"gl.lstm_layers", &PipelineConfig::gl_lstm_layers},
      {"gt.base_width", &PipelineConfig::gt_base_width},
      {"gt.heatmap_sigma", &PipelineConfig::gt_heatmap_sigma},
      {"lambda.ver", &PipelineConfig::lambda_ver},
      {"lambda.gan", &PipelineConfig::lambda_gan},
      {"lambda.rec", &PipelineConfig::lambda_rec},
      {"lambda.per", &PipelineConfig::lambda_per},
      {"lambda.adv", &PipelineConfig::lambda_adv},
      {"lr.landmarks", &PipelineConfig::lr_landmarks},
      {"lr.texture", &PipelineConfig::lr_texture},
      {"lr.adapt", &PipelineConfig::lr_adapt},
      {"batch.landmarks", &PipelineConfig::batch_landmarks},
      {"batch.texture", &PipelineConfig::batch_texture},
      {"sequence_length", &PipelineConfig::sequence_length},
      {"steps.landmarks", &PipelineConfig::steps_landmarks},
      {"steps.texture", &PipelineConfig::steps_texture},
      {"adapt.steps", &PipelineConfig::adapt_steps},
      {"perceptual", &PipelineConfig::perceptual},
      {"scorer.identity", &PipelineConfig::scorer_identity},
      {"scorer.emotion", &PipelineConfig::scorer_emotion},
      {"scorer.sync", &PipelineConfig::scorer_sync},
      {"blink.mean_interval_s", &geometry::BlinkParams::mean_interval_s},
      {"blink.duration_s", &geometry::BlinkParams::duration_s},
      {"blink.amplitude", &geometry::BlinkParams::amplitude},
      {"jobs", &PipelineConfig::jobs},
  };
  return k;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("config: bad value for " + key + ": '" + v + "'");
  return out;
}

template <typename T>
std::string format_number(T v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void validate_config(const PipelineConfig& c) {
  if (c.fps != 30.0) throw ConfigError("config: fps must be 30");
  if (c.resolution < 16 || c.resolution % 16 != 0) throw ConfigError("config: resolution must be a multiple of 16");
  if (c.adapt_steps < 0 || c.adapt_steps > 5) throw ConfigError("config: adapt.steps must lie in [0, 5]");
  if (c.jobs < 1) throw ConfigError("config: jobs must be positive");
  if (c.batch_landmarks < 1 || c.batch_texture < 1 || c.sequence_length < 1) {
    throw ConfigError("config: batch sizes and sequence_length must be positive");
  }
  if (c.gl_lstm_hidden < 1 || c.gl_lstm_layers < 1 || c.gt_base_width < 1) {
    throw ConfigError("config: model widths must be positive");
  }
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const Key* found = nullptr;
    for (const auto& k : keys())
      if (key == k.name) found = &k;
    if (!found) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    std::visit(
        [&](auto member) {
          using M = decltype(member);
          if constexpr (std::is_same_v<M, int PipelineConfig::*>) {
            c.*member = parse_number<int>(value, key);
          } else if constexpr (std::is_same_v<M, double PipelineConfig::*>) {
            c.*member = parse_number<double>(value, key);
          } else if constexpr (std::is_same_v<M, std::uint64_t PipelineConfig::*>) {
            c.*member = parse_number<std::uint64_t>(value, key);
          } else if constexpr (std::is_same_v<M, std::string PipelineConfig::*>) {
            c.*member = value;
          } else {
            c.blink.*member = parse_number<double>(value, key);
          }
        },
        found->field);
  }
  validate_config(c);
  return c;
}

std::string serialize_config(const PipelineConfig& c) {
  std::string out;
  for (const auto& k : keys()) {
    std::string value = std::visit(
        [&](auto member) -> std::string {
          using M = decltype(member);
          if constexpr (std::is_same_v<M, std::string PipelineConfig::*>) {
            return c.*member;
          } else if constexpr (std::is_same_v<M, double geometry::BlinkParams::*>) {
            return format_number(c.blink.*member);
          } else {
            return format_number(c.*member);
          }
        },
        k.field);
    out += std::string(k.name) + " = " + value + "\n";
  }
  return out;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    c = parse_config(ss.str());
  }
  if (const char* env = std::getenv("EMOFACE_SEED"); env && *env) {
    c.seed = parse_number<std::uint64_t>(env, "EMOFACE_SEED");
  }
  c.blink.fps = c.fps;
  return c;
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << serialize_config(config);
}

}  // namespace emoface::pipeline
