#pragma once

#include <span>
#include <vector>

#include "emoface/geometry/landmarks.hpp"

namespace emoface::metrics {

struct LandmarkDistances {
  double ld = 0.0;   // mean vertex distance
  double lvd = 0.0;  // mean velocity difference, per frame
};

/// LD averages the Euclidean distance over frames x subset; LVD averages the
/// distance between frame-to-frame velocities over the T - 1 transitions
/// (0 for single frames). Throws ContractError on a length mismatch, an
/// empty sequence or an index outside 0..67.
LandmarkDistances landmark_distance(std::span<const geometry::LandmarkSet> pred,
                                    std::span<const geometry::LandmarkSet> gt, const std::vector<int>& subset);

}  // namespace emoface::metrics
