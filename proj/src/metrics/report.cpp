#include "emoface/metrics/report.hpp"

#include <fstream>

#include <json.hpp>

#include "emoface/errors.hpp"

namespace emoface::metrics {

std::string format_report(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["psnr"] = r.psnr;
  j["ssim"] = r.ssim;
  j["cpbd"] = r.cpbd;
  j["fid"] = r.fid;
  j["m_ld"] = r.m_ld;
  j["m_lvd"] = r.m_lvd;
  j["f_ld"] = r.f_ld;
  j["f_lvd"] = r.f_lvd;
  if (r.csim) j["csim"] = *r.csim;
  if (r.emo_acc) j["emo_acc"] = *r.emo_acc;
  if (r.sync_conf) j["sync_conf"] = *r.sync_conf;
  return j.dump(2) + "\n";
}

MetricReport parse_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("metric report: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw FormatError("metric report: expected a JSON object", 0);
  auto req = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw FormatError(std::string("metric report: missing ") + key, 0);
    return j[key].get<double>();
  };
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    return j[key].get<double>();
  };
  MetricReport r;
  r.psnr = req("psnr");
  r.ssim = req("ssim");
  r.cpbd = req("cpbd");
  r.fid = req("fid");
  r.m_ld = req("m_ld");
  r.m_lvd = req("m_lvd");
  r.f_ld = req("f_ld");
  r.f_lvd = req("f_lvd");
  r.csim = opt("csim");
  r.emo_acc = opt("emo_acc");
  r.sync_conf = opt("sync_conf");
  return r;
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report " + path.string());
  out << format_report(report);
}

}  // namespace emoface::metrics
