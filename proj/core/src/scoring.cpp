#include "patchcluster/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <string>

#include "patchcluster/error.hpp"
#include "patchcluster/postprocess.hpp"

namespace patchcluster::scoring {

namespace {

// Guards the lrd ratio against rows whose neighbourhood is all duplicates.
constexpr double kReachEpsilon = 1e-10;

}  // namespace

std::string_view to_string(Scorer s) noexcept {
  switch (s) {
    case Scorer::patch_cluster: return "patchcluster";
    case Scorer::patch_core: return "patchcore";
    case Scorer::lof: return "lof";
  }
  return "patchcluster";
}

Scorer parse_scorer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "patchcluster") return Scorer::patch_cluster;
  if (lower == "patchcore") return Scorer::patch_core;
  if (lower == "lof" || lower == "patchcore-lof") return Scorer::lof;
  fail(Errc::invalid_argument, "unknown scorer '" + std::string(name) + "'");
}

void ScorerConfig::validate(std::size_t bank_size) const {
  if (k == 0) fail(Errc::invalid_argument, "K must be at least 1");
  if (start_index == 0) fail(Errc::invalid_argument, "start_index must be at least 1");
  if (!(gaussian_sigma > 0.0)) fail(Errc::invalid_argument, "sigma must be positive");
  const std::size_t needed_k = scorer == Scorer::patch_core ? 1 : k;
  if (start_index - 1 + needed_k > bank_size) {
    fail(Errc::insufficient_bank_size,
         "insufficient bank size: K=" + std::to_string(needed_k) +
             " with start_index=" + std::to_string(start_index) +
             " needs " + std::to_string(start_index - 1 + needed_k) +
             " rows, bank has " + std::to_string(bank_size));
  }
  if (scorer == Scorer::lof && k + 1 > bank_size) {
    fail(Errc::insufficient_bank_size,
         "insufficient bank size for LoF with K=" + std::to_string(k));
  }
  if (scorer != Scorer::lof && effective_b() > bank_size) {
    fail(Errc::insufficient_bank_size,
         "insufficient bank size: b=" + std::to_string(effective_b()) +
             " exceeds bank rows " + std::to_string(bank_size));
  }
}

std::size_t default_k_for_ratio(double ratio) {
  struct Pair { double ratio; std::size_t k; };
  static constexpr Pair kTable[] = {{1.0, 100}, {0.25, 25}, {0.10, 10}, {0.01, 5}};
  for (const auto& p : kTable) {
    if (std::abs(p.ratio - ratio) < 1e-9) return p.k;
  }
  return std::max<std::size_t>(5, static_cast<std::size_t>(std::llround(100.0 * ratio)));
}

double patch_score(const bank::NeighborSet& neighbors) {
  if (neighbors.empty()) fail(Errc::invalid_argument, "patch_score: empty neighbour set");
  double s = 0.0;
  for (double d : neighbors.distances) s += d;
  return s / static_cast<double>(neighbors.size());
}

LofModel::LofModel(const bank::MemoryBank& bank, std::size_t k, std::size_t workers)
    : bank_(&bank), k_(k), k_distance_(bank.size()), mean_reach_(bank.size()) {
  // Row neighbourhoods exclude the row itself.
  const auto neighbors = bank::query_knn_batch(bank, bank.features(), k, 2, workers);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    k_distance_[i] = neighbors[i].distances.back();
  }
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const auto& nb = neighbors[i];
    double s = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      s += std::max(k_distance_[nb.indices[j]], nb.distances[j]);
    }
    mean_reach_[i] = s / static_cast<double>(nb.size());
  }
}

double LofModel::score(std::span<const float> query,
                       const bank::NeighborSet& neighbors) const {
  (void)query;
  if (neighbors.empty()) fail(Errc::invalid_argument, "LoF: empty neighbour set");
  double reach = 0.0;
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    reach += std::max(k_distance_[neighbors.indices[j]], neighbors.distances[j]);
  }
  reach /= static_cast<double>(neighbors.size());
  if (reach == 0.0) return 1.0;

  double ratio = 0.0;
  for (std::size_t idx : neighbors.indices) {
    ratio += reach / std::max(mean_reach_[idx], kReachEpsilon);
  }
  return ratio / static_cast<double>(neighbors.size());
}

double lof_score(const bank::MemoryBank& bank, std::span<const float> query,
                 std::size_t k, std::size_t start_index) {
  const LofModel model(bank, k);
  return model.score(query, bank::query_knn(bank, query, k, start_index));
}

RawScoreMap score_feature_map(const bank::MemoryBank& bank,
                              const features::PatchFeatureMap& map,
                              const ScorerConfig& cfg, const LofModel* lof) {
  cfg.validate(bank.size());
  if (map.dim() != bank.dim()) {
    fail(Errc::shape_mismatch, "feature map '" + map.image_id + "' has dim " +
                                   std::to_string(map.dim()) + ", bank has " +
                                   std::to_string(bank.dim()));
  }

  const std::size_t k = cfg.scorer == Scorer::patch_core ? 1 : cfg.k;
  const auto neighbors =
      bank::query_knn_batch(bank, map.grid.values, k, cfg.start_index, cfg.workers);

  std::unique_ptr<LofModel> owned;
  if (cfg.scorer == Scorer::lof && (lof == nullptr || lof->k() != cfg.k)) {
    owned = std::make_unique<LofModel>(bank, cfg.k, cfg.workers);
    lof = owned.get();
  }

  RawScoreMap raw;
  raw.image_id = map.image_id;
  raw.scores = VectorGrid(map.width(), map.height(), 1);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const std::span<const float> q(map.grid.values.data() + i * map.dim(), map.dim());
    const double s = cfg.scorer == Scorer::lof ? lof->score(q, neighbors[i])
                                               : patch_score(neighbors[i]);
    raw.scores.values[i] = static_cast<float>(s);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  raw.argmax_w = best / map.height();
  raw.argmax_h = best % map.height();
  raw.max_score = best_score;
  const auto f = map.grid.at(raw.argmax_w, raw.argmax_h);
  raw.argmax_feature.assign(f.begin(), f.end());
  raw.argmax_neighbors = neighbors[best];
  return raw;
}

double reweighted_score(double max_patch_score, std::span<const double> distances,
                        bool clamp) {
  if (distances.empty()) fail(Errc::invalid_argument, "reweighting needs b >= 1");
  const double shift = *std::max_element(distances.begin(), distances.end());
  double sum = 0.0;
  for (double d : distances) sum += std::exp(d - shift);
  const double excess = max_patch_score - shift;
  const double ratio = excess < 700.0 ? std::exp(excess) / sum
                                      : std::exp(excess - std::log(sum));
  double weight = 1.0 - ratio;
  if (clamp) weight = std::clamp(weight, 0.0, 1.0);
  return weight * max_patch_score;
}

double image_score(const RawScoreMap& raw, const bank::MemoryBank& bank,
                   const ScorerConfig& cfg) {
  if (cfg.scorer == Scorer::lof) return raw.max_score;
  if (raw.argmax_neighbors.empty()) {
    fail(Errc::invalid_argument, "raw score map has no argmax neighbourhood");
  }
  const std::size_t nearest = raw.argmax_neighbors.indices.front();
  const auto gallery =
      bank::query_knn(bank, bank.row(nearest), cfg.effective_b(), 1);
  std::vector<double> distances;
  distances.reserve(gallery.size());
  for (std::size_t idx : gallery.indices) {
    distances.push_back(bank::exact_distance(raw.argmax_feature, bank.row(idx)));
  }
  return reweighted_score(raw.max_score, distances, cfg.clamp_weight);
}

ScoreMap upsample_and_smooth(const RawScoreMap& raw, io::ImageSize size,
                             double sigma) {
  ScoreMap out;
  out.image_id = raw.image_id;
  out.pixels = gaussian_smooth(upsample_scores(raw.scores, size.height, size.width), sigma);
  out.max_patch_score = raw.max_score;
  out.image_score = raw.max_score;
  return out;
}

}  // namespace patchcluster::scoring
