#include "patchcluster_cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "patchcluster/error.hpp"
#include "patchcluster/heatmap.hpp"
#include "patchcluster/pipeline.hpp"
#include "patchcluster/tensor_file.hpp"

namespace patchcluster::cli {

using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_input, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::parse_error, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_failure, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) fail(Errc::io_failure, "cannot write " + path.string());
}

void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) fail(Errc::invalid_argument, "an output directory is required");
}

ScalarImage read_score_map(const fs::path& path) {
  const io::Tensor t = io::read_tensor(path);
  if (t.dims.size() != 2 || t.dtype() != io::DType::f32) {
    fail(Errc::shape_mismatch, "score map must be a 2-D float32 tensor: " + path.string());
  }
  ScalarImage img;
  img.height = t.dims[0];
  img.width = t.dims[1];
  img.data = t.f32();
  return img;
}

struct ScoreIndexEntry {
  std::string id;
  fs::path map;
  double image_score = 0.0;
};

std::vector<ScoreIndexEntry> read_score_index(const Layout& layout, json* config) {
  const json doc = read_json(layout.scores());
  std::vector<ScoreIndexEntry> out;
  try {
    if (config) *config = doc.at("config");
    for (const auto& e : doc.at("images")) {
      out.push_back({e.at("id").get<std::string>(),
                     layout.root / e.at("map").get<std::string>(),
                     e.at("image_score").get<double>()});
    }
  } catch (const json::exception& e) {
    fail(Errc::parse_error, layout.scores().string() + ": " + e.what());
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (one_class && setting != io::BadSetting::test) {
    fail(Errc::config_conflict, "one-class mode scores the test split and cannot be combined "
                                "with the '" + std::string(io::to_string(setting)) +
                                    "' setting");
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    fail(Errc::invalid_argument, "ratio must lie in (0, 1]");
  }
  if (patch_size == 0 || patch_size % 2 == 0) {
    fail(Errc::invalid_argument, "patch size must be odd");
  }
  if (workers == 0) fail(Errc::invalid_argument, "workers must be at least 1");
}

scoring::ScorerConfig RunConfig::scorer_config() const {
  scoring::ScorerConfig sc;
  sc.k = k.value_or(scoring::default_k_for_ratio(ratio));
  sc.start_index = start_index.value_or(one_class ? 1 : 2);
  sc.scorer = scorer;
  sc.b = b;
  sc.gaussian_sigma = sigma;
  sc.clamp_weight = clamp_weight;
  sc.workers = workers;
  return sc;
}

std::vector<io::ImageRecord> RunConfig::bank_records(const io::DatasetManifest& m) const {
  if (!one_class) return io::build_bad_setting(m, setting);
  std::vector<io::ImageRecord> train;
  for (const auto& r : m.records) {
    if (r.split == io::Split::train) train.push_back(r);
  }
  if (train.empty()) {
    fail(Errc::config_conflict, "one-class mode requires train records; manifest '" +
                                    m.category + "' has none");
  }
  std::sort(train.begin(), train.end(),
            [](const io::ImageRecord& a, const io::ImageRecord& b) { return a.id < b.id; });
  return train;
}

std::vector<io::ImageRecord> RunConfig::scored_records(const io::DatasetManifest& m) const {
  return io::build_bad_setting(m, setting);
}

std::string RunConfig::setting_name() const {
  return one_class ? "one-class" : std::string(io::to_string(setting));
}

json RunConfig::to_json() const {
  const auto sc = scorer_config();
  json j;
  j["setting"] = setting_name();
  j["scorer"] = std::string(scoring::to_string(scorer));
  j["k"] = sc.k;
  j["start_index"] = sc.start_index;
  j["b"] = sc.effective_b();
  j["ratio"] = ratio;
  j["seed"] = seed;
  j["projection_dim"] = projection_dim ? json(*projection_dim) : json(nullptr);
  j["sigma"] = sigma;
  j["patch_size"] = patch_size;
  j["clamp_weight"] = clamp_weight;
  return j;
}

void apply_setting(RunConfig& cfg, const std::string& name) {
  if (name == "one-class") {
    cfg.one_class = true;
    cfg.setting = io::BadSetting::test;
    return;
  }
  cfg.setting = io::parse_setting(name);
}

std::string file_stem_for(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return s;
}

fs::path cmd_bank(const RunConfig& cfg) {
  cfg.validate();
  require_out(cfg);
  const auto manifest = io::load_manifest(cfg.manifest);
  const auto records = cfg.bank_records(manifest);
  const auto maps = pipeline::load_features(records, cfg.patch_size, cfg.workers);
  const auto bank = pipeline::build_bank(
      maps, {cfg.ratio, cfg.seed, cfg.projection_dim, cfg.workers});
  fs::create_directories(cfg.out);
  const Layout layout{cfg.out};
  bank::save_bank(bank, layout.bank());
  return layout.bank();
}

fs::path cmd_score(const RunConfig& cfg, const std::optional<fs::path>& bank_path) {
  cfg.validate();
  require_out(cfg);
  const Layout layout{cfg.out};
  const auto manifest = io::load_manifest(cfg.manifest);
  const auto records = cfg.scored_records(manifest);
  const auto bank = bank::load_bank(bank_path.value_or(layout.bank()));
  const auto sc = cfg.scorer_config();
  try {
    sc.validate(bank.size());
  } catch (const Error& e) {
    fail(e.code(), std::string("score: ") + e.what() + " (bank " +
                       bank_path.value_or(layout.bank()).filename().string() + ")");
  }
  const auto maps = pipeline::load_features(records, cfg.patch_size, cfg.workers);
  const auto scored = pipeline::score_images(bank, maps, sc, manifest.image_size);

  fs::create_directories(layout.score_maps());
  json images = json::array();
  for (const auto& s : scored) {
    const fs::path rel = fs::path("score_maps") / (file_stem_for(s.image_id) + ".pcfb");
    const std::size_t dims[2] = {s.pixels.height, s.pixels.width};
    io::write_tensor(layout.root / rel, dims, s.pixels.data);
    images.push_back({{"id", s.image_id},
                      {"map", rel.generic_string()},
                      {"image_score", s.image_score},
                      {"max_patch_score", s.max_patch_score}});
  }
  json doc;
  doc["config"] = cfg.to_json();
  doc["bank_rows"] = bank.size();
  doc["images"] = std::move(images);
  write_json(layout.scores(), doc);
  return layout.scores();
}

eval::EvalReport cmd_eval(const RunConfig& cfg) {
  cfg.validate();
  require_out(cfg);
  const Layout layout{cfg.out};
  const auto manifest = io::load_manifest(cfg.manifest);
  const auto records = cfg.scored_records(manifest);
  json config;
  const auto index = read_score_index(layout, &config);

  std::map<std::string, ScalarImage> maps;
  std::map<std::string, double> image_scores;
  for (const auto& e : index) {
    maps[e.id] = read_score_map(e.map);
    image_scores[e.id] = e.image_score;
  }
  auto report = eval::evaluate_run(manifest.category, cfg.setting, records,
                                   manifest.image_size, maps, image_scores, config);
  report.setting = cfg.setting_name();
  eval::save_report(report, layout.report());
  eval::write_csv(std::span(&report, 1), layout.root / "report.csv");
  return report;
}

io::DatasetManifest cmd_synth(const synth::SynthConfig& cfg, const fs::path& out) {
  if (out.empty()) fail(Errc::invalid_argument, "an output directory is required");
  return synth::generate_bad_dataset(cfg, out);
}

std::size_t cmd_heatmap(const RunConfig& cfg) {
  require_out(cfg);
  const Layout layout{cfg.out};
  const auto manifest = io::load_manifest(cfg.manifest);
  std::map<std::string, const io::ImageRecord*> by_id;
  for (const auto& r : manifest.records) by_id[r.id] = &r;

  fs::create_directories(layout.heatmaps());
  std::size_t written = 0;
  for (const auto& e : read_score_index(layout, nullptr)) {
    const ScalarImage scores = read_score_map(e.map);
    std::optional<viz::RgbImage> background;
    const auto it = by_id.find(e.id);
    if (it != by_id.end() && it->second->image_path) {
      background = viz::read_png(*it->second->image_path);
    }
    const auto rgb = viz::render_heatmap(scores, background ? &*background : nullptr);
    viz::write_png(layout.heatmaps() / (file_stem_for(e.id) + ".png"), rgb);
    ++written;
  }
  return written;
}

eval::EvalReport cmd_run(const RunConfig& cfg) {
  cmd_bank(cfg);
  cmd_score(cfg);
  return cmd_eval(cfg);
}

}  // namespace patchcluster::cli
