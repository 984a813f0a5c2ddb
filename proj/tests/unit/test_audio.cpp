#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "emoface/audio/features.hpp"
#include "emoface/errors.hpp"
#include "emoface/nn/rng.hpp"

using namespace emoface;
using namespace emoface::audio;

namespace {

AudioFeatureSequence ramp(std::size_t frames) {
  std::vector<float> v(frames * kNumChannels);
  for (std::size_t t = 0; t < frames; ++t)
    for (int c = 0; c < kNumChannels; ++c) v[t * kNumChannels + static_cast<std::size_t>(c)] = static_cast<float>(t);
  return AudioFeatureSequence(std::move(v));
}

std::vector<std::uint8_t> header(std::uint32_t t, std::uint32_t c) {
  std::vector<std::uint8_t> b = {'A', 'F', '0', '1'};
  for (std::uint32_t v : {t, c})
    for (int k = 0; k < 4; ++k) b.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  return b;
}

}  // namespace

TEST(Features, ThirtyFramesParse) {
  auto bytes = header(30, 29);
  bytes.resize(bytes.size() + 30 * 29 * 4, 0);
  EXPECT_EQ(parse_features(bytes).frames(), 30u);
}

TEST(Features, WrongChannelCountIsFormatError) {
  auto bytes = header(30, 28);
  bytes.resize(bytes.size() + 30 * 28 * 4, 0);
  try {
    parse_features(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
}

TEST(Features, TruncatedAndBadMagicAreFormatErrors) {
  auto bytes = serialize_features(ramp(4));
  EXPECT_THROW(parse_features(std::span(bytes).first(bytes.size() - 1)), FormatError);
  bytes[0] = 'X';
  EXPECT_THROW(parse_features(bytes), FormatError);
  EXPECT_THROW(parse_features(header(0, 29)), FormatError);
}

TEST(Features, SaveLoadRoundTrip) {
  nn::Rng rng(9);
  std::vector<float> v(17 * kNumChannels);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  const AudioFeatureSequence seq(v);
  const auto path = std::filesystem::temp_directory_path() / "emoface_unit_features.af";
  save_features(path, seq);
  EXPECT_EQ(load_features(path), seq);
}

TEST(Features, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(AudioFeatureSequence(std::vector<float>{}), ContractError);
  std::vector<float> v(kNumChannels, 0.0f);
  v[3] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(AudioFeatureSequence(std::move(v)), ContractError);
}

TEST(Windows, SingleFrameReplicates) {
  const auto w = window_features(ramp(1));
  ASSERT_EQ(w.windows.shape(), (nn::Shape{1, kWindow, kNumChannels}));
  for (float x : w.windows.values()) EXPECT_EQ(x, 0.0f);
}

TEST(Windows, InteriorRampRowsAreOffsets) {
  const auto w = window_features(ramp(20));
  const int t = 10;
  for (int k = 0; k < kWindow; ++k) EXPECT_EQ(w.windows.at(t, k, 0), static_cast<float>(t - 2 + k));
}

TEST(Windows, EdgesClampAndLengthIsPreserved) {
  nn::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t frames = 1 + rng.below(300);
    const auto w = window_features(ramp(frames));
    ASSERT_EQ(w.frames(), frames);
    EXPECT_EQ(w.windows.at(0, 0, 5), 0.0f);
    EXPECT_EQ(w.windows.at(static_cast<int>(frames) - 1, kWindow - 1, 5), static_cast<float>(frames - 1));
  }
}

TEST(SyntheticExtractor, EnvelopeIsDeterministicPerSeed) {
  const std::vector<double> env = {0.0, 0.5, 1.0, 0.2};
  const SyntheticExtractor a(3), b(3), c(4);
  EXPECT_EQ(a.from_envelope(env), b.from_envelope(env));
  EXPECT_FALSE(a.from_envelope(env) == c.from_envelope(env));
  EXPECT_EQ(a.from_envelope(env).frames(), env.size());
}
