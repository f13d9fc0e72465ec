#include <algorithm>
#include <string>
#include <vector>

#include "patchcluster/error.hpp"
#include "patchcluster/heatmap.hpp"
#include "patchcluster/tensor_file.hpp"
#include "patchcluster_cli/commands.hpp"

namespace patchcluster::cli {

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory()
                    : (e.is_regular_file() && e.path().extension() == ".png")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Nearest-neighbour resize to size x size, then a centred crop x crop window.
Mask mask_from_png(const fs::path& path, std::uint32_t size, std::uint32_t crop) {
  const viz::RgbImage img = viz::read_png(path);
  const std::size_t offset = (size - crop) / 2;
  Mask mask;
  mask.height = crop;
  mask.width = crop;
  mask.data.assign(std::size_t(crop) * crop, 0);
  for (std::size_t y = 0; y < crop; ++y) {
    const std::size_t sy = std::min(img.height - 1, (2 * (y + offset) + 1) * img.height / (2 * size));
    for (std::size_t x = 0; x < crop; ++x) {
      const std::size_t sx = std::min(img.width - 1, (2 * (x + offset) + 1) * img.width / (2 * size));
      mask.at(y, x) = img.rgb[(sy * img.width + sx) * 3] != 0 ? 1 : 0;
    }
  }
  return mask;
}

fs::path import_category(const fs::path& dir, const ImportOptions& options,
                         std::vector<std::string>& all_problems) {
  std::vector<std::string> problems;
  const std::string category = dir.filename().string();
  const fs::path train = dir / "train" / "good";
  const fs::path test = dir / "test";
  const fs::path truth = dir / "ground_truth";
  for (const auto& p : {train, test}) {
    if (!fs::is_directory(p)) problems.push_back("missing directory: " + p.string());
  }
  if (!problems.empty()) {
    all_problems.insert(all_problems.end(), problems.begin(), problems.end());
    return {};
  }

  const fs::path out_dir = options.out / category;
  io::DatasetManifest m;
  m.category = category;
  m.image_size = {options.crop, options.crop};

  for (const auto& img : sorted_entries(train, false)) {
    io::ImageRecord r;
    r.id = "train_good_" + img.stem().string();
    r.image_path = fs::absolute(img);
    r.split = io::Split::train;
    m.records.push_back(std::move(r));
  }

  std::vector<std::pair<io::ImageRecord, Mask>> masked;
  for (const auto& defect_dir : sorted_entries(test, true)) {
    const std::string defect = defect_dir.filename().string();
    for (const auto& img : sorted_entries(defect_dir, false)) {
      io::ImageRecord r;
      r.id = "test_" + defect + "_" + img.stem().string();
      r.image_path = fs::absolute(img);
      r.split = io::Split::test;
      if (defect != "good") {
        const fs::path gt = truth / defect / (img.stem().string() + "_mask.png");
        if (!fs::is_regular_file(gt)) {
          problems.push_back("missing ground truth: " + gt.string());
          continue;
        }
        r.label = io::Label::anomalous;
        masked.emplace_back(r, mask_from_png(gt, options.resize, options.crop));
        continue;
      }
      m.records.push_back(std::move(r));
    }
  }
  if (!problems.empty()) {
    all_problems.insert(all_problems.end(), problems.begin(), problems.end());
    return {};
  }

  fs::create_directories(out_dir / "masks");
  for (auto& [rec, mask] : masked) {
    const fs::path mask_path = out_dir / "masks" / (file_stem_for(rec.id) + ".pcfb");
    const std::size_t dims[2] = {mask.height, mask.width};
    io::write_tensor(mask_path, dims, mask.data);
    rec.mask_path = mask_path;
    m.records.push_back(std::move(rec));
  }
  std::sort(m.records.begin(), m.records.end(),
            [](const io::ImageRecord& a, const io::ImageRecord& b) { return a.id < b.id; });
  const fs::path manifest_path = out_dir / "manifest.json";
  io::save_manifest(m, manifest_path);
  return manifest_path;
}

}  // namespace

std::vector<fs::path> cmd_import_mvtec(const ImportOptions& options) {
  if (options.out.empty()) fail(Errc::invalid_argument, "an output directory is required");
  if (options.crop == 0 || options.crop > options.resize) {
    fail(Errc::invalid_argument, "crop must lie in [1, resize]");
  }
  if (!fs::is_directory(options.root)) {
    fail(Errc::layout_violation, "missing directory: " + options.root.string());
  }

  std::vector<fs::path> categories;
  if (fs::exists(options.root / "train") || fs::exists(options.root / "test")) {
    categories.push_back(options.root);
  } else {
    categories = sorted_entries(options.root, true);
  }
  if (categories.empty()) {
    fail(Errc::layout_violation, "no categories under " + options.root.string());
  }

  std::vector<std::string> problems;
  std::vector<fs::path> manifests;
  for (const auto& dir : categories) {
    const fs::path p = import_category(dir, options, problems);
    if (!p.empty()) manifests.push_back(p);
  }
  if (!problems.empty()) {
    std::string msg = "MVTec layout violations:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(Errc::layout_violation, msg);
  }
  return manifests;
}

}  // namespace patchcluster::cli
