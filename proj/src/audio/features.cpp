#include "emoface/audio/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "emoface/errors.hpp"

namespace emoface::audio {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

AudioFeatureSequence::AudioFeatureSequence(std::vector<float> logits) : logits_(std::move(logits)) {
  if (logits_.empty() || logits_.size() % kNumChannels != 0) {
    throw ContractError("feature sequence needs T >= 1 rows of 29 values, got " + std::to_string(logits_.size()) +
                        " values");
  }
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    if (!std::isfinite(logits_[i])) {
      throw ContractError("non-finite feature at frame " + std::to_string(i / kNumChannels));
    }
  }
}

AudioFeatureSequence AudioFeatureSequence::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > frames()) throw ContractError("feature slice out of range");
  return AudioFeatureSequence(std::vector<float>(logits_.begin() + static_cast<std::ptrdiff_t>(first * kNumChannels),
                                                 logits_.begin() +
                                                     static_cast<std::ptrdiff_t>((first + count) * kNumChannels)));
}

namespace {

constexpr char kMagic[4] = {'A', 'F', '0', '1'};
constexpr std::size_t kHeaderBytes = 12;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + at, 4);
  return v;
}

}  // namespace

AudioFeatureSequence parse_features(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("feature file shorter than its magic", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad feature magic, expected AF01", 0);
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated feature header", bytes.size());
  const std::uint32_t t = read_u32(bytes, 4);
  const std::uint32_t c = read_u32(bytes, 8);
  if (t == 0) throw FormatError("feature file declares zero frames", 4);
  if (c != kNumChannels) throw FormatError("feature file declares " + std::to_string(c) + " channels, expected 29", 8);
  const std::size_t body = static_cast<std::size_t>(t) * c * sizeof(float);
  if (bytes.size() < kHeaderBytes + body) throw FormatError("truncated feature body", bytes.size());
  if (bytes.size() > kHeaderBytes + body) throw FormatError("trailing bytes after feature body", kHeaderBytes + body);
  std::vector<float> values(static_cast<std::size_t>(t) * c);
  std::memcpy(values.data(), bytes.data() + kHeaderBytes, body);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw FormatError("non-finite feature value", kHeaderBytes + i * sizeof(float));
  }
  return AudioFeatureSequence(std::move(values));
}

AudioFeatureSequence load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_features(bytes);
}

std::vector<std::uint8_t> serialize_features(const AudioFeatureSequence& seq) {
  std::vector<std::uint8_t> out(kHeaderBytes + seq.values().size() * sizeof(float));
  std::memcpy(out.data(), kMagic, 4);
  const std::uint32_t t = static_cast<std::uint32_t>(seq.frames()), c = kNumChannels;
  std::memcpy(out.data() + 4, &t, 4);
  std::memcpy(out.data() + 8, &c, 4);
  std::memcpy(out.data() + kHeaderBytes, seq.values().data(), seq.values().size() * sizeof(float));
  return out;
}

void save_features(const std::filesystem::path& path, const AudioFeatureSequence& seq) {
  const auto bytes = serialize_features(seq);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write feature file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FeatureWindowSequence window_features(const AudioFeatureSequence& seq) {
  const int t_count = static_cast<int>(seq.frames());
  FeatureWindowSequence out;
  out.windows = nn::Tensor({t_count, kWindow, kNumChannels});
  float* dst = out.windows.data();
  for (int t = 0; t < t_count; ++t) {
    for (int k = 0; k < kWindow; ++k) {
      const int src = std::clamp(t - 2 + k, 0, t_count - 1);
      const auto row = seq.row(static_cast<std::size_t>(src));
      std::copy(row.begin(), row.end(), dst);
      dst += kNumChannels;
    }
  }
  return out;
}

}  // namespace emoface::audio
