#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchcluster/grid.hpp"
#include "patchcluster/manifest.hpp"

namespace patchcluster::eval {

struct EvalReport {
  std::string category;
  std::string setting;
  std::optional<double> image_auroc;  // absent when only one image class occurs
  double pixel_auroc = 0.0;
  double pro = 0.0;
  std::map<std::string, double> image_scores;
  nlohmann::json config = nlohmann::json::object();

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct ScoredImage {
  std::string id;
  Mask mask;
  ScalarImage pixels;
  double image_score = 0.0;
};

/// Pixel AUROC and PRO over all images; image AUROC (image label =
/// mask has a nonzero pixel) only when both labels occur.
EvalReport evaluate_images(std::string category, std::string setting,
                           std::span<const ScoredImage> images,
                           nlohmann::json config = nlohmann::json::object());

/// Loads each record's mask and evaluates. Throws missing_input when a
/// record has no score map or image score.
EvalReport evaluate_run(const std::string& category, io::BadSetting setting,
                        std::span<const io::ImageRecord> records,
                        io::ImageSize image_size,
                        const std::map<std::string, ScalarImage>& maps,
                        const std::map<std::string, double>& image_scores,
                        nlohmann::json config = nlohmann::json::object());

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& doc);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// One row per report: category,setting,image_auroc,pixel_auroc,pro
/// (percentages with one decimal, empty cell for an absent image AUROC).
void write_csv(std::span<const EvalReport> reports, const std::filesystem::path& path);

}  // namespace patchcluster::eval
