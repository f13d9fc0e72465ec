#include "patchcluster/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "patchcluster/error.hpp"
#include "patchcluster/metrics.hpp"

namespace patchcluster::eval {

using nlohmann::json;

EvalReport evaluate_images(std::string category, std::string setting,
                           std::span<const ScoredImage> images, json config) {
  EvalReport report;
  report.category = std::move(category);
  report.setting = std::move(setting);
  report.config = std::move(config);

  std::vector<ScalarImage> maps;
  std::vector<Mask> masks;
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;
  maps.reserve(images.size());
  masks.reserve(images.size());
  for (const auto& img : images) {
    maps.push_back(img.pixels);
    masks.push_back(img.mask);
    const bool anomalous = std::any_of(img.mask.data.begin(), img.mask.data.end(),
                                       [](unsigned char v) { return v != 0; });
    scores.push_back(static_cast<float>(img.image_score));
    labels.push_back(anomalous ? 1 : 0);
    report.image_scores[img.id] = img.image_score;
  }
  const bool both = std::find(labels.begin(), labels.end(), 0) != labels.end() &&
                    std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (both) report.image_auroc = auroc(scores, labels);
  report.pixel_auroc = pixel_auroc(maps, masks);
  report.pro = pro_score(maps, masks);
  return report;
}

EvalReport evaluate_run(const std::string& category, io::BadSetting setting,
                        std::span<const io::ImageRecord> records,
                        io::ImageSize image_size,
                        const std::map<std::string, ScalarImage>& maps,
                        const std::map<std::string, double>& image_scores,
                        json config) {
  std::vector<ScoredImage> images;
  images.reserve(records.size());
  for (const auto& rec : records) {
    const auto m = maps.find(rec.id);
    const auto s = image_scores.find(rec.id);
    if (m == maps.end() || s == image_scores.end()) {
      fail(Errc::missing_input, "no score for record '" + rec.id + "'");
    }
    images.push_back({rec.id, io::record_mask(rec, image_size), m->second, s->second});
  }
  auto report = evaluate_images(category, std::string(io::to_string(setting)),
                                images, std::move(config));
  // Only anomalous images exist in Ano; never report an image AUROC there.
  if (setting == io::BadSetting::ano) report.image_auroc.reset();
  return report;
}

json to_json(const EvalReport& report) {
  json doc;
  doc["category"] = report.category;
  doc["setting"] = report.setting;
  if (report.image_auroc) doc["image_auroc"] = *report.image_auroc;
  doc["pixel_auroc"] = report.pixel_auroc;
  doc["pro"] = report.pro;
  doc["image_scores"] = report.image_scores;
  doc["config"] = report.config;
  return doc;
}

EvalReport report_from_json(const json& doc) {
  try {
    EvalReport r;
    r.category = doc.at("category").get<std::string>();
    r.setting = doc.at("setting").get<std::string>();
    if (doc.contains("image_auroc")) r.image_auroc = doc["image_auroc"].get<double>();
    r.pixel_auroc = doc.at("pixel_auroc").get<double>();
    r.pro = doc.at("pro").get<double>();
    r.image_scores = doc.at("image_scores").get<std::map<std::string, double>>();
    r.config = doc.value("config", json::object());
    return r;
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("eval report: ") + e.what());
  }
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_input, "cannot open " + path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
}

void write_csv(std::span<const EvalReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io_failure, "cannot write " + path.string());
  out << "category,setting,image_auroc,pixel_auroc,pro\n";
  char buf[32];
  for (const auto& r : reports) {
    out << r.category << ',' << r.setting << ',';
    if (r.image_auroc) {
      std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *r.image_auroc);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.1f", 100.0 * r.pixel_auroc);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.1f\n", 100.0 * r.pro);
    out << buf;
  }
}

}  // namespace patchcluster::eval
