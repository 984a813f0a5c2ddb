#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emoface/geometry/landmarks.hpp"

namespace emoface::geometry {

struct BlinkParams {
  double mean_interval_s = 3.0;
  double duration_s = 0.3;
  /// Fraction of the upper-to-lower lid gap closed at the apex.
  double amplitude = 0.8;
  double fps = 30.0;

  friend bool operator==(const BlinkParams&, const BlinkParams&) = default;
};

/// Upper-lid vertices and the lower-lid vertex each moves toward.
inline constexpr int kUpperLid[4] = {37, 38, 43, 44};
inline constexpr int kLowerLid[4] = {41, 40, 47, 46};

/// Raised-cosine closure in [0, 1] at time t for a blink starting at `onset`.
double blink_closure(double t, double onset, double duration);

/// Onset times (seconds) covering `num_frames` frames: exponential
/// inter-arrival gaps, each blink starting after the previous one ends.
std::vector<double> blink_onsets(std::size_t num_frames, const BlinkParams& params, std::uint64_t seed);

/// Closes the upper lids at the given onsets. Only the four upper-lid
/// vertices are modified.
std::vector<LandmarkSet> add_blinks_at(std::span<const LandmarkSet> sequence, const BlinkParams& params,
                                       std::span<const double> onsets);
std::vector<LandmarkSet> add_blinks(std::span<const LandmarkSet> sequence, const BlinkParams& params,
                                    std::uint64_t seed);

}  // namespace emoface::geometry
