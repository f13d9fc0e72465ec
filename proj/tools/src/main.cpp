#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "patchcluster/error.hpp"
#include "patchcluster/parallel.hpp"
#include "patchcluster_cli/commands.hpp"

namespace pc = patchcluster;
namespace cli = patchcluster::cli;

namespace {

void print_error(std::string_view code, const std::string& message) {
  nlohmann::json doc{{"error", code}, {"message", message}};
  std::cerr << doc.dump() << '\n';
}

struct RunFlags {
  std::string setting = "test";
  std::string scorer = "patchcluster";
  std::size_t k = 0;
  std::size_t start_index = 0;
  std::size_t projection_dim = 0;
};

void add_run_options(CLI::App* cmd, cli::RunConfig& cfg, RunFlags& flags) {
  cmd->add_option("--manifest", cfg.manifest, "Dataset manifest")->required();
  cmd->add_option("--out", cfg.out, "Output directory")->required();
  cmd->add_option("--setting", flags.setting, "mix | test | ano | one-class")
      ->capture_default_str();
  cmd->add_flag("--one-class", cfg.one_class, "Bank from train split, score test split");
  cmd->add_option("--scorer", flags.scorer, "patchcluster | patchcore | lof")
      ->capture_default_str();
  cmd->add_option("--k", flags.k, "Neighbours per patch (default follows --ratio)");
  cmd->add_option("--start-index", flags.start_index,
                  "1-based rank of the first neighbour used (default 2; 1 for one-class)");
  cmd->add_option("--b", cfg.b, "Neighbourhood size of the image-score reweighting (default K)");
  cmd->add_option("--ratio", cfg.ratio, "Coreset subsampling ratio in (0, 1]")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Coreset seed")->capture_default_str();
  cmd->add_option("--projection-dim", flags.projection_dim,
                  "Random projection dimension for coreset selection (0 = off)");
  cmd->add_option("--sigma", cfg.sigma, "Gaussian smoothing sigma")->capture_default_str();
  cmd->add_option("--patch-size", cfg.patch_size, "Local average pooling size")
      ->capture_default_str();
  cmd->add_flag("--clamp-weight", cfg.clamp_weight, "Clamp the image-score weight to [0, 1]");
  cmd->add_option("--workers", cfg.workers, "Worker threads (env PATCHCLUSTER_WORKERS)")
      ->capture_default_str();
}

void finish_run_config(cli::RunConfig& cfg, const RunFlags& flags) {
  cli::apply_setting(cfg, flags.setting);
  cfg.scorer = pc::scoring::parse_scorer(flags.scorer);
  if (flags.k != 0) cfg.k = flags.k;
  if (flags.start_index != 0) cfg.start_index = flags.start_index;
  if (flags.projection_dim != 0) cfg.projection_dim = flags.projection_dim;
  cfg.validate();
}

void print_report(const pc::eval::EvalReport& r) {
  nlohmann::json summary{{"category", r.category},
                         {"setting", r.setting},
                         {"pixel_auroc", r.pixel_auroc},
                         {"pro", r.pro}};
  if (r.image_auroc) summary["image_auroc"] = *r.image_auroc;
  std::cout << summary.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free anomaly detection on contaminated patch features"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  cfg.workers = pc::default_workers();
  RunFlags flags;

  cli::ImportOptions import;
  auto* import_cmd = app.add_subcommand("import-mvtec", "Map an MVTec AD tree to manifests");
  import_cmd->add_option("--root", import.root, "MVTec root or category directory")->required();
  import_cmd->add_option("--out", import.out, "Output directory")->required();
  import_cmd->add_option("--resize", import.resize, "Square resize before cropping")
      ->capture_default_str();
  import_cmd->add_option("--crop", import.crop, "Centre crop size")->capture_default_str();

  pc::synth::SynthConfig synth;
  std::string synth_config;
  std::filesystem::path synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic contaminated dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--config", synth_config, "JSON config (as written to synth.json)");
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--num-images", synth.num_images)->capture_default_str();
  synth_cmd->add_option("--num-train", synth.num_train_images)->capture_default_str();
  synth_cmd->add_option("--grid-width", synth.grid_width)->capture_default_str();
  synth_cmd->add_option("--grid-height", synth.grid_height)->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
  synth_cmd->add_option("--clusters", synth.num_location_clusters)->capture_default_str();
  synth_cmd->add_option("--normal-sigma", synth.normal_sigma)->capture_default_str();
  synth_cmd->add_option("--anomaly-sigma", synth.anomaly_sigma)->capture_default_str();
  synth_cmd->add_option("--defect-sigma", synth.defect_sigma)->capture_default_str();
  synth_cmd->add_option("--anomaly-image-fraction", synth.anomaly_image_fraction)
      ->capture_default_str();
  synth_cmd->add_option("--anomaly-area-fraction", synth.anomaly_area_fraction)
      ->capture_default_str();

  auto* bank_cmd = app.add_subcommand("bank", "Build the memory bank");
  auto* score_cmd = app.add_subcommand("score", "Score images against the bank");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate score maps");
  auto* run_cmd = app.add_subcommand("run", "bank, score and eval in one go");
  for (auto* cmd : {bank_cmd, score_cmd, eval_cmd, run_cmd}) add_run_options(cmd, cfg, flags);
  std::filesystem::path bank_path;
  score_cmd->add_option("--bank", bank_path, "Bank tensor (default <out>/bank.pcfb)");

  auto* heatmap_cmd = app.add_subcommand("heatmap", "Render PNG heatmap overlays");
  heatmap_cmd->add_option("--manifest", cfg.manifest, "Dataset manifest")->required();
  heatmap_cmd->add_option("--out", cfg.out, "Directory holding scores.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*import_cmd) {
      for (const auto& p : cli::cmd_import_mvtec(import)) std::cout << p.string() << '\n';
    } else if (*synth_cmd) {
      if (!synth_config.empty()) {
        std::ifstream in(synth_config);
        if (!in) pc::fail(pc::Errc::missing_input, "cannot open " + synth_config);
        try {
          synth = pc::synth::synth_config_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
          pc::fail(pc::Errc::parse_error, synth_config + ": " + e.what());
        }
      }
      const auto m = cli::cmd_synth(synth, synth_out);
      std::cout << (synth_out / "manifest.json").string() << " (" << m.records.size()
                << " records)\n";
    } else if (*heatmap_cmd) {
      std::cout << cli::cmd_heatmap(cfg) << " heatmaps written\n";
    } else {
      finish_run_config(cfg, flags);
      if (*bank_cmd) {
        std::cout << cli::cmd_bank(cfg).string() << '\n';
      } else if (*score_cmd) {
        std::optional<std::filesystem::path> bank;
        if (!bank_path.empty()) bank = bank_path;
        std::cout << cli::cmd_score(cfg, bank).string() << '\n';
      } else if (*eval_cmd) {
        print_report(cli::cmd_eval(cfg));
      } else if (*run_cmd) {
        print_report(cli::cmd_run(cfg));
      }
    }
  } catch (const pc::Error& e) {
    print_error(pc::to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
