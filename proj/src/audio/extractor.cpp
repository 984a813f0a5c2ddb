#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "emoface/audio/features.hpp"
#include "emoface/errors.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::audio {

namespace {

std::uint32_t u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + at, 4);
  return v;
}

std::uint16_t u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint16_t v;
  std::memcpy(&v, b.data() + at, 2);
  return v;
}

}  // namespace

std::vector<double> read_wav_mono(const std::filesystem::path& path, int* sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open audio file " + path.string());
  const std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file", 0);
  }
  int channels = 0, rate = 0, bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw FormatError("truncated WAV chunk", pos);
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("short fmt chunk", pos);
      if (u16(b, body) != 1) throw FormatError("only PCM WAV is supported", body);
      channels = u16(b, body + 2);
      rate = static_cast<int>(u32(b, body + 4));
      bits = u16(b, body + 14);
      if (bits != 16) throw FormatError("only 16-bit WAV is supported", body + 14);
      if (channels < 1) throw FormatError("WAV declares no channels", body + 2);
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      if (channels == 0) throw FormatError("data chunk before fmt chunk", pos);
      const std::size_t frames = size / (2u * static_cast<unsigned>(channels));
      std::vector<double> out(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          std::int16_t s;
          std::memcpy(&s, b.data() + body + (i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)) * 2, 2);
          acc += s / 32768.0;
        }
        out[i] = acc / channels;
      }
      if (sample_rate) *sample_rate = rate;
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError("WAV file has no data chunk", b.size());
}

AudioFeatureSequence SyntheticExtractor::extract(const std::filesystem::path& wav_file) const {
  int rate = 0;
  const auto samples = read_wav_mono(wav_file, &rate);
  if (rate <= 0) throw FormatError("WAV sample rate must be positive", 24);
  const double per_frame = rate / kFps;
  const std::size_t frames =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(samples.size() / per_frame)));
  std::vector<double> envelope(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto first = static_cast<std::size_t>(std::floor(t * per_frame));
    const auto last = std::min(samples.size(), static_cast<std::size_t>(std::floor((t + 1) * per_frame)));
    double acc = 0.0;
    for (std::size_t i = first; i < last; ++i) acc += samples[i] * samples[i];
    envelope[t] = last > first ? std::min(1.0, 3.0 * std::sqrt(acc / static_cast<double>(last - first))) : 0.0;
  }
  return from_envelope(envelope);
}

AudioFeatureSequence SyntheticExtractor::from_envelope(std::span<const double> envelope) const {
  if (envelope.empty()) throw ContractError("empty loudness envelope");
  nn::Rng rng(seed_);
  const std::size_t t_count = envelope.size();
  std::vector<double> noise(t_count * kNumChannels);
  for (auto& v : noise) v = rng.normal();
  std::vector<float> logits(t_count * kNumChannels);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (int c = 0; c < kNumChannels; ++c) {
      // Three-tap moving average keeps the noise band-limited in time.
      double acc = 0.0;
      int taps = 0;
      for (std::size_t s = (t == 0 ? 0 : t - 1); s <= std::min(t_count - 1, t + 1); ++s, ++taps) {
        acc += noise[s * kNumChannels + static_cast<std::size_t>(c)];
      }
      const double smooth = acc / taps;
      const double e = std::clamp(envelope[t], 0.0, 1.0);
      // Channel 0 plays the role of the blank symbol: dominant in silence.
      const double value = c == 0 ? 4.0 * (1.0 - e) + 0.3 * smooth : -2.0 + 3.0 * e * (1.0 + smooth) * ((c % 5) + 1) / 5.0;
      logits[t * kNumChannels + static_cast<std::size_t>(c)] = static_cast<float>(value);
    }
  }
  return AudioFeatureSequence(std::move(logits));
}

}  // namespace emoface::audio
