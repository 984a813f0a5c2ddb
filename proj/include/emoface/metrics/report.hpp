#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace emoface::metrics {

/// Texture, landmark and (optional) scorer-based metrics of an evaluation.
struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double cpbd = 0.0;
  double fid = 0.0;
  double m_ld = 0.0, m_lvd = 0.0;
  double f_ld = 0.0, f_lvd = 0.0;
  std::optional<double> csim, emo_acc, sync_conf;
};

/// Flat JSON object, one key per field; absent optionals are omitted.
std::string format_report(const MetricReport& report);
MetricReport parse_report(const std::string& text);
void write_report(const std::filesystem::path& path, const MetricReport& report);

}  // namespace emoface::metrics
