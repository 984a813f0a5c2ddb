#include "emoface/metrics/landmark_metrics.hpp"

#include <cmath>

#include "emoface/errors.hpp"

namespace emoface::metrics {

LandmarkDistances landmark_distance(std::span<const geometry::LandmarkSet> pred,
                                    std::span<const geometry::LandmarkSet> gt, const std::vector<int>& subset) {
  if (pred.size() != gt.size()) {
    throw ContractError("landmark_distance: " + std::to_string(pred.size()) + " predicted vs " +
                        std::to_string(gt.size()) + " reference frames");
  }
  if (pred.empty() || subset.empty()) throw ContractError("landmark_distance: empty input");
  for (int i : subset)
    if (i < 0 || i >= geometry::kNumLandmarks) throw ContractError("landmark_distance: bad landmark index");

  LandmarkDistances out;
  double ld = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t)
    for (int i : subset) ld += std::hypot(pred[t][i].x - gt[t][i].x, pred[t][i].y - gt[t][i].y);
  out.ld = ld / static_cast<double>(pred.size() * subset.size());

  if (pred.size() > 1) {
    double lvd = 0.0;
    for (std::size_t t = 1; t < pred.size(); ++t)
      for (int i : subset) {
        const double vpx = pred[t][i].x - pred[t - 1][i].x, vpy = pred[t][i].y - pred[t - 1][i].y;
        const double vgx = gt[t][i].x - gt[t - 1][i].x, vgy = gt[t][i].y - gt[t - 1][i].y;
        lvd += std::hypot(vpx - vgx, vpy - vgy);
      }
    out.lvd = lvd / static_cast<double>((pred.size() - 1) * subset.size());
  }
  return out;
}

}  // namespace emoface::metrics
