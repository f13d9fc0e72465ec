#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "patchcluster/error.hpp"
#include "patchcluster/heatmap.hpp"
#include "patchcluster/manifest.hpp"
#include "patchcluster/report.hpp"
#include "patchcluster_cli/commands.hpp"
#include "test_util.hpp"

namespace pc = patchcluster;
namespace cli = patchcluster::cli;
namespace fs = std::filesystem;
using pctest::TempDir;

namespace {

pc::synth::SynthConfig small_synth(std::size_t train = 0) {
  pc::synth::SynthConfig c;
  c.num_images = 20;
  c.num_train_images = train;
  c.grid_width = 12;
  c.grid_height = 12;
  c.dim = 16;
  c.num_location_clusters = 4;
  c.cluster_block = 4;
  c.anomaly_image_fraction = 0.3;
  c.anomaly_area_fraction = 0.06;
  c.pixel_scale = 4;
  return c;
}

cli::RunConfig run_config(const fs::path& manifest, const fs::path& out) {
  cli::RunConfig cfg;
  cfg.manifest = manifest;
  cfg.out = out;
  cfg.k = 5;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Proc {
  int status = -1;
  std::string out;
  std::string err;
};

Proc run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + PATCHCLUSTER_CLI_PATH + "\" " + args +
                          " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  Proc p;
  const int raw = std::system(cmd.c_str());
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  p.out = slurp(out);
  p.err = slurp(err);
  return p;
}

void write_mask_png(const fs::path& p, std::size_t size, bool blob) {
  pc::viz::RgbImage img{size, size, std::vector<std::uint8_t>(size * size * 3, 0)};
  if (blob) {
    for (std::size_t y = size / 4; y < size / 2; ++y) {
      for (std::size_t x = size / 4; x < size / 2; ++x) {
        for (int c = 0; c < 3; ++c) img.rgb[(y * size + x) * 3 + c] = 255;
      }
    }
  }
  fs::create_directories(p.parent_path());
  pc::viz::write_png(p, img);
}

// bottle/{train/good/000, test/good/000, test/crack/000, ground_truth/crack/000_mask}
fs::path mvtec_fixture(const fs::path& root) {
  const fs::path cat = root / "bottle";
  write_mask_png(cat / "train" / "good" / "000.png", 32, false);
  write_mask_png(cat / "test" / "good" / "000.png", 32, false);
  write_mask_png(cat / "test" / "crack" / "000.png", 32, false);
  write_mask_png(cat / "ground_truth" / "crack" / "000_mask.png", 32, true);
  return cat;
}

}  // namespace

TEST(Cli, SynthRunProducesAllMetrics) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  const auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  const auto report = cli::cmd_run(cfg);
  ASSERT_TRUE(report.image_auroc.has_value());
  EXPECT_GE(report.pixel_auroc, 0.0);
  EXPECT_LE(report.pixel_auroc, 1.0);
  EXPECT_GE(report.pro, 0.0);
  EXPECT_LE(report.pro, 1.0);
  EXPECT_EQ(report.setting, "test");
  EXPECT_EQ(report.image_scores.size(), 20u);

  const cli::Layout layout{cfg.out};
  EXPECT_TRUE(fs::exists(layout.bank()));
  EXPECT_TRUE(fs::exists(layout.scores()));
  EXPECT_EQ(pc::eval::load_report(layout.report()), report);
  EXPECT_TRUE(fs::exists(cfg.out / "report.csv"));

  const auto scores = nlohmann::json::parse(slurp(layout.scores()));
  EXPECT_EQ(scores.at("bank_rows"), 20 * 12 * 12);
  EXPECT_EQ(scores.at("images").size(), 20u);
  EXPECT_EQ(scores.at("config").at("k"), 5);
}

TEST(Cli, RunIsDeterministic) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "a");
  cfg.ratio = 0.5;
  cli::cmd_run(cfg);
  cfg.out = tmp / "b";
  cfg.workers = 3;
  cli::cmd_run(cfg);
  EXPECT_EQ(slurp(tmp / "a" / "report.json"), slurp(tmp / "b" / "report.json"));
  EXPECT_EQ(slurp(tmp / "a" / "scores.json"), slurp(tmp / "b" / "scores.json"));
}

TEST(Cli, SeparateStepsMatchRun) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "steps");
  cli::cmd_bank(cfg);
  cli::cmd_score(cfg);
  const auto stepwise = cli::cmd_eval(cfg);
  cfg.out = tmp / "run";
  EXPECT_EQ(cli::cmd_run(cfg), stepwise);
}

TEST(Cli, ScoreReportsInsufficientBank) {
  TempDir tmp;
  auto synth = small_synth();
  synth.num_images = 2;
  synth.anomaly_image_fraction = 0.5;
  synth.grid_width = synth.grid_height = 4;
  cli::cmd_synth(synth, tmp / "data");
  auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  cfg.k = 1;
  cli::cmd_bank(cfg);
  cfg.k = 100;
  try {
    cli::cmd_score(cfg);
    FAIL() << "expected insufficient_bank_size";
  } catch (const pc::Error& e) {
    EXPECT_EQ(e.code(), pc::Errc::insufficient_bank_size);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("score: "), std::string::npos) << msg;
    EXPECT_NE(msg.find("bank.pcfb"), std::string::npos) << msg;
  }
}

TEST(Cli, OneClassConflicts) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  cfg.one_class = true;
  cfg.setting = pc::io::BadSetting::ano;
  EXPECT_ERRC(cfg.validate(), config_conflict);

  cfg.setting = pc::io::BadSetting::test;
  EXPECT_ERRC(cli::cmd_bank(cfg), config_conflict);
}

TEST(Cli, OneClassUsesTrainSplit) {
  TempDir tmp;
  cli::cmd_synth(small_synth(10), tmp / "data");
  auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  cli::apply_setting(cfg, "one-class");
  EXPECT_TRUE(cfg.one_class);
  EXPECT_EQ(cfg.scorer_config().start_index, 1u);
  const auto report = cli::cmd_run(cfg);
  EXPECT_EQ(report.setting, "one-class");
  EXPECT_EQ(report.image_scores.size(), 20u);
  const auto bank = nlohmann::json::parse(slurp(tmp / "run" / "scores.json"));
  EXPECT_EQ(bank.at("bank_rows"), 10 * 12 * 12);
}

TEST(Cli, SettingNames) {
  cli::RunConfig cfg;
  cli::apply_setting(cfg, "mix");
  EXPECT_EQ(cfg.setting, pc::io::BadSetting::mix);
  EXPECT_EQ(cfg.scorer_config().start_index, 2u);
  cli::apply_setting(cfg, "ano");
  EXPECT_EQ(cfg.setting_name(), "ano");
  EXPECT_THROW(cli::apply_setting(cfg, "bogus"), pc::Error);
}

TEST(Cli, ConfigJsonHasNoPaths) {
  TempDir tmp;
  auto cfg = run_config(tmp / "m.json", tmp / "out");
  const auto j = cfg.to_json();
  EXPECT_EQ(j.dump().find(tmp.path().string()), std::string::npos);
}

TEST(Cli, FileStemSanitizes) {
  EXPECT_EQ(cli::file_stem_for("test_crack_000"), "test_crack_000");
  EXPECT_EQ(cli::file_stem_for("a/b c"), "a_b_c");
}

TEST(Cli, ImportMvtecFixture) {
  TempDir tmp;
  mvtec_fixture(tmp / "mvtec");
  const auto manifests = cli::cmd_import_mvtec({tmp / "mvtec", tmp / "out", 32, 24});
  ASSERT_EQ(manifests.size(), 1u);
  const auto m = pc::io::load_manifest(manifests[0]);
  EXPECT_EQ(m.category, "bottle");
  EXPECT_EQ(m.image_size, (pc::io::ImageSize{24, 24}));
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.records[0].id, "test_crack_000");
  EXPECT_EQ(m.records[0].label, pc::io::Label::anomalous);
  ASSERT_TRUE(m.records[0].mask_path.has_value());
  EXPECT_EQ(m.records[1].id, "test_good_000");
  EXPECT_EQ(m.records[1].label, pc::io::Label::normal);
  EXPECT_EQ(m.records[2].id, "train_good_000");
  EXPECT_EQ(m.records[2].split, pc::io::Split::train);
  for (const auto& r : m.records) {
    EXPECT_TRUE(r.feature_paths.empty());
    EXPECT_TRUE(r.image_path.has_value());
  }

  // Blob covers [8, 16) of a 32-pixel side; crop offset is 4.
  const auto mask = pc::io::read_mask(*m.records[0].mask_path);
  EXPECT_EQ(mask.at(4, 4), 1);
  EXPECT_EQ(mask.at(11, 11), 1);
  EXPECT_EQ(mask.at(3, 3), 0);
  EXPECT_EQ(mask.at(12, 12), 0);
}

TEST(Cli, ImportListsMissingPaths) {
  TempDir tmp;
  const fs::path cat = mvtec_fixture(tmp / "mvtec");
  fs::remove_all(cat / "test");
  fs::create_directories(tmp / "mvtec" / "cable" / "train" / "good");
  try {
    cli::cmd_import_mvtec({tmp / "mvtec", tmp / "out"});
    FAIL() << "expected layout_violation";
  } catch (const pc::Error& e) {
    EXPECT_EQ(e.code(), pc::Errc::layout_violation);
    const std::string msg = e.what();
    EXPECT_NE(msg.find((cat / "test").string()), std::string::npos) << msg;
    EXPECT_NE(msg.find((tmp / "mvtec" / "cable" / "test").string()), std::string::npos)
        << msg;
  }
}

TEST(Cli, ImportReportsMissingGroundTruth) {
  TempDir tmp;
  const fs::path cat = mvtec_fixture(tmp / "mvtec");
  fs::remove(cat / "ground_truth" / "crack" / "000_mask.png");
  EXPECT_ERRC(cli::cmd_import_mvtec({cat, tmp / "out"}), layout_violation);
}

TEST(Cli, HeatmapWritesPngs) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  const auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  cli::cmd_bank(cfg);
  cli::cmd_score(cfg);
  EXPECT_EQ(cli::cmd_heatmap(cfg), 20u);
  const auto png = pc::viz::read_png(tmp / "run" / "heatmaps" / "test_0000.png");
  EXPECT_EQ(png.height, 48u);
  EXPECT_EQ(png.width, 48u);
}

TEST(Cli, EvalWithoutScoresIsMissingInput) {
  TempDir tmp;
  cli::cmd_synth(small_synth(), tmp / "data");
  const auto cfg = run_config(tmp / "data" / "manifest.json", tmp / "run");
  EXPECT_ERRC(cli::cmd_eval(cfg), missing_input);
}

TEST(CliBinary, RunPrintsSummary) {
  TempDir tmp;
  const auto data = (tmp / "data").string();
  auto p = run_cli("synth --out \"" + data +
                       "\" --num-images 12 --grid-width 8 --grid-height 8 --dim 8 "
                       "--clusters 2 --anomaly-image-fraction 0.4",
                   tmp.path());
  ASSERT_EQ(p.status, 0) << p.err;
  p = run_cli("run --manifest \"" + data + "/manifest.json\" --out \"" +
                  (tmp / "run").string() + "\" --k 3 --workers 1",
              tmp.path());
  ASSERT_EQ(p.status, 0) << p.err;
  const auto summary = nlohmann::json::parse(p.out);
  EXPECT_TRUE(summary.contains("pixel_auroc"));
  EXPECT_TRUE(summary.contains("pro"));
  EXPECT_TRUE(summary.contains("image_auroc"));
}

TEST(CliBinary, ErrorsAreJsonOnStderr) {
  TempDir tmp;
  auto p = run_cli("run --manifest \"" + (tmp / "nope.json").string() + "\" --out \"" +
                       (tmp / "run").string() + "\"",
                   tmp.path());
  EXPECT_EQ(p.status, 1);
  const auto err = nlohmann::json::parse(p.err);
  EXPECT_EQ(err.at("error"), "missing_input");
  EXPECT_FALSE(err.at("message").get<std::string>().empty());
}

TEST(CliBinary, UsageErrorsExitTwo) {
  TempDir tmp;
  auto p = run_cli("run --k 3", tmp.path());
  EXPECT_EQ(p.status, 2);
  EXPECT_EQ(nlohmann::json::parse(p.err).at("error"), "usage");
  p = run_cli("frobnicate", tmp.path());
  EXPECT_EQ(p.status, 2);
}
