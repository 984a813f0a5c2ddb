#include "emoface/geometry/blink.hpp"

#include <algorithm>
#include <cmath>

#include "emoface/errors.hpp"
#include "emoface/nn/rng.hpp"

namespace emoface::geometry {

double blink_closure(double t, double onset, double duration) {
  const double tau = t - onset;
  if (duration <= 0.0 || tau <= 0.0 || tau >= duration) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * M_PI * tau / duration));
}

std::vector<double> blink_onsets(std::size_t num_frames, const BlinkParams& params, std::uint64_t seed) {
  if (!(params.fps > 0.0) || !(params.mean_interval_s > 0.0)) {
    throw ContractError("blink parameters need positive fps and mean interval");
  }
  nn::Rng rng(seed);
  const double end = static_cast<double>(num_frames) / params.fps;
  std::vector<double> onsets;
  double t = rng.exponential(params.mean_interval_s);
  while (t < end) {
    onsets.push_back(t);
    t += std::max(params.duration_s, 0.0) + rng.exponential(params.mean_interval_s);
  }
  return onsets;
}

std::vector<LandmarkSet> add_blinks_at(std::span<const LandmarkSet> sequence, const BlinkParams& params,
                                       std::span<const double> onsets) {
  std::vector<LandmarkSet> out(sequence.begin(), sequence.end());
  if (params.amplitude == 0.0) return out;
  for (std::size_t f = 0; f < out.size(); ++f) {
    const double t = static_cast<double>(f) / params.fps;
    double closure = 0.0;
    for (double onset : onsets) closure = std::max(closure, blink_closure(t, onset, params.duration_s));
    if (closure == 0.0) continue;
    LandmarkSet frame = out[f];
    const double w = params.amplitude * closure;
    for (int k = 0; k < 4; ++k) {
      const Point2 up = frame[kUpperLid[k]], low = frame[kLowerLid[k]];
      frame = frame.with_point(kUpperLid[k], {up.x + w * (low.x - up.x), up.y + w * (low.y - up.y)});
    }
    out[f] = frame;
  }
  return out;
}

std::vector<LandmarkSet> add_blinks(std::span<const LandmarkSet> sequence, const BlinkParams& params,
                                    std::uint64_t seed) {
  const auto onsets = blink_onsets(sequence.size(), params, seed);
  return add_blinks_at(sequence, params, onsets);
}

}  // namespace emoface::geometry
