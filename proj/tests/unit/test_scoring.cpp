#include <cmath>

#include "patchcluster/error.hpp"
#include "patchcluster/knn.hpp"
#include "patchcluster/oracles.hpp"
#include "patchcluster/scoring.hpp"
#include "test_util.hpp"

namespace bk = patchcluster::bank;
namespace sc = patchcluster::scoring;
namespace ft = patchcluster::features;
namespace oracle = patchcluster::oracle;

namespace {

bk::NeighborSet with_distances(std::vector<double> d) {
  bk::NeighborSet n;
  n.indices.resize(d.size());
  n.distances = std::move(d);
  return n;
}

sc::ScorerConfig config(sc::Scorer s, std::size_t k, std::size_t start = 2) {
  sc::ScorerConfig c;
  c.scorer = s;
  c.k = k;
  c.start_index = start;
  return c;
}

}  // namespace

TEST(PatchScore, Examples) {
  EXPECT_DOUBLE_EQ(sc::patch_score(with_distances({0.7})), 0.7);
  EXPECT_EQ(sc::patch_score(with_distances({0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(sc::patch_score(with_distances({1, 2, 6})), 3.0);
  EXPECT_ERRC(sc::patch_score(with_distances({})), invalid_argument);
}

TEST(ScoreFeatureMap, MatchesOracleAndExcludesSelf) {
  std::mt19937_64 rng(1);
  const auto map = pctest::random_map(rng, 6, 5, 4);
  const std::vector<ft::PatchFeatureMap> maps{map};
  const auto bank = bk::assemble(maps);
  const auto raw = sc::score_feature_map(bank, map, config(sc::Scorer::patch_cluster, 7));
  EXPECT_EQ(raw.scores.width, 6u);
  EXPECT_EQ(raw.scores.height, 5u);
  for (std::size_t w = 0; w < 6; ++w) {
    for (std::size_t h = 0; h < 5; ++h) {
      const double want =
          oracle::patch_score_oracle(bank.features(), 4, map.grid.at(w, h), 7, 2);
      EXPECT_GT(raw.scores.at(w, h)[0], 0.0f);
      EXPECT_NEAR(raw.scores.at(w, h)[0], want, 1e-6 * want);
    }
  }
  EXPECT_EQ(raw.argmax_neighbors.size(), 7u);
  EXPECT_FLOAT_EQ(static_cast<float>(raw.max_score), raw.scores.at(raw.argmax_w, raw.argmax_h)[0]);
}

TEST(ScoreFeatureMap, PatchClusterK1IsPatchCore) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const auto map = pctest::random_map(rng, 7, 7, 5);
    const std::vector<ft::PatchFeatureMap> maps{map, pctest::random_map(rng, 7, 7, 5)};
    const auto bank = bk::assemble(maps);
    const auto a = sc::score_feature_map(bank, map, config(sc::Scorer::patch_cluster, 1));
    const auto b = sc::score_feature_map(bank, map, config(sc::Scorer::patch_core, 1));
    EXPECT_EQ(a.scores.values, b.scores.values);
    EXPECT_EQ(a.argmax_w, b.argmax_w);
    EXPECT_EQ(a.argmax_h, b.argmax_h);
    EXPECT_EQ(sc::image_score(a, bank, config(sc::Scorer::patch_cluster, 1)),
              sc::image_score(b, bank, config(sc::Scorer::patch_core, 1)));
  }
}

TEST(ScoreFeatureMap, PlantedOutlierHasMaximumScore) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  auto map = pctest::random_map(rng, 8, 8, 6);
  for (auto& v : map.grid.values) v = noise(rng);
  for (auto& v : map.grid.at(5, 2)) v += 3.0f;
  const std::vector<ft::PatchFeatureMap> maps{map};
  const auto bank = bk::assemble(maps);
  for (auto s : {sc::Scorer::patch_cluster, sc::Scorer::patch_core, sc::Scorer::lof}) {
    const auto raw = sc::score_feature_map(bank, map, config(s, 5));
    EXPECT_EQ(raw.argmax_w, 5u);
    EXPECT_EQ(raw.argmax_h, 2u);
  }
}

TEST(ScoreFeatureMap, PositiveHomogeneity) {
  std::mt19937_64 rng(4);
  const auto map = pctest::random_map(rng, 5, 5, 3);
  auto scaled = map;
  for (auto& v : scaled.grid.values) v *= 2.5f;
  const auto a = sc::score_feature_map(bk::assemble(std::vector{map}), map,
                                       config(sc::Scorer::patch_cluster, 4));
  const auto b = sc::score_feature_map(bk::assemble(std::vector{scaled}), scaled,
                                       config(sc::Scorer::patch_cluster, 4));
  for (std::size_t i = 0; i < a.scores.values.size(); ++i) {
    EXPECT_NEAR(b.scores.values[i], 2.5 * a.scores.values[i], 1e-6 * 2.5 * a.scores.values[i]);
  }
}

TEST(ScoreFeatureMap, ConfigValidation) {
  std::mt19937_64 rng(5);
  const auto map = pctest::random_map(rng, 2, 2, 3);
  const auto bank = bk::assemble(std::vector{map});
  EXPECT_ERRC(sc::score_feature_map(bank, map, config(sc::Scorer::patch_cluster, 4)),
              insufficient_bank_size);
  EXPECT_ERRC(sc::score_feature_map(bank, map, config(sc::Scorer::patch_cluster, 0)),
              invalid_argument);
  auto other = pctest::random_map(rng, 2, 2, 2);
  EXPECT_ERRC(sc::score_feature_map(bank, other, config(sc::Scorer::patch_cluster, 1)),
              shape_mismatch);
  auto c = config(sc::Scorer::patch_cluster, 1);
  c.b = 5;
  EXPECT_ERRC(c.validate(4), insufficient_bank_size);
}

TEST(Lof, CoincidentPointsGiveOne) {
  const auto bank = pctest::bank_from_rows(2, std::vector<float>(20, 1.0f));
  const std::vector<float> q{1.0f, 1.0f};
  EXPECT_EQ(sc::lof_score(bank, q, 3, 2), 1.0);
  EXPECT_EQ(oracle::lof_oracle(bank.features(), 2, q, 3, 2), 1.0);
}

TEST(Lof, LatticeInteriorNearOne) {
  std::vector<float> lattice;
  for (int i = 0; i < 21; ++i) lattice.push_back(static_cast<float>(i));
  const auto bank = pctest::bank_from_rows(1, lattice);
  const std::vector<float> q{10.0f};
  const double lof = sc::lof_score(bank, q, 2, 2);
  EXPECT_NEAR(lof, 1.0, 1e-9);
  EXPECT_NEAR(lof, oracle::lof_oracle(bank.features(), 1, q, 2, 2), 1e-9);
}

TEST(Lof, PlantedOutlierAboveTwo) {
  std::mt19937_64 rng(6);
  std::normal_distribution<float> noise(0.0f, 0.1f);
  std::vector<float> rows(2 * 60);
  for (auto& v : rows) v = noise(rng);
  rows.push_back(5.0f);
  rows.push_back(5.0f);
  const auto bank = pctest::bank_from_rows(2, rows);
  const std::vector<float> q{5.0f, 5.0f};
  const double lof = sc::lof_score(bank, q, 5, 2);
  EXPECT_GT(lof, 2.0);
  EXPECT_NEAR(lof, oracle::lof_oracle(bank.features(), 2, q, 5, 2), 1e-9 * lof);
}

TEST(Lof, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 20 + rng() % 80, d = 1 + rng() % 5, k = 1 + rng() % 8;
    const auto bank = pctest::bank_from_rows(d, pctest::random_floats(rng, n * d));
    const auto q = pctest::random_floats(rng, d);
    const double got = sc::lof_score(bank, q, k, 1);
    EXPECT_NEAR(got, oracle::lof_oracle(bank.features(), d, q, k, 1), 1e-9 * got);
  }
}

TEST(ImageScore, SymmetricCaseIsExact) {
  for (std::size_t b : {1u, 2u, 3u, 7u, 100u}) {
    for (double a : {0.3, 1.0, 2.75, 40.0}) {
      const std::vector<double> d(b, a);
      EXPECT_EQ(sc::reweighted_score(a, d, false), (1.0 - 1.0 / static_cast<double>(b)) * a);
    }
  }
  // b = 1 with the single distance equal to a*: weight 0.
  EXPECT_EQ(sc::reweighted_score(1.7, std::vector<double>{1.7}, false), 0.0);
}

TEST(ImageScore, MatchesDirectFormula) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t b = 1 + rng() % 10;
    std::vector<double> d(b);
    for (auto& x : d) x = u(rng);
    const double a = u(rng);
    const double want = oracle::image_score_oracle(a, d);
    EXPECT_NEAR(sc::reweighted_score(a, d, false), want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST(ImageScore, NoOverflowForLargeDistances) {
  const std::vector<double> d{900.0, 905.0, 910.0};
  const double s = sc::reweighted_score(906.0, d, false);
  EXPECT_TRUE(std::isfinite(s));
  const double ratio = std::exp(906.0 - 910.0) / (std::exp(-10.0) + std::exp(-5.0) + 1.0);
  EXPECT_NEAR(s, (1.0 - ratio) * 906.0, 1e-9 * 906.0);
}

TEST(ImageScore, WeightBelowOneAndClamp) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> d(1 + rng() % 6);
    for (auto& x : d) x = u(rng);
    const double a = u(rng) + 1e-3;
    EXPECT_LT(sc::reweighted_score(a, d, false), a);
    const double c = sc::reweighted_score(a, d, true);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, a);
  }
}

// Bank of six 2-D vectors, b = 3: the image score follows the formula with
// N(f*) the three bank rows nearest to f*, f* itself included.
TEST(ImageScore, ExplicitTwoDimensionalInstance) {
  const auto bank = pctest::bank_from_rows(2, {0, 0, 1, 0, 0, 1, 4, 4, 5, 4, 9, 9});
  sc::RawScoreMap raw;
  raw.argmax_feature = {4.5f, 3.0f};
  raw.max_score = 1.2;
  raw.argmax_neighbors = bk::query_knn(bank, raw.argmax_feature, 2, 1);
  auto cfg = config(sc::Scorer::patch_cluster, 2);
  cfg.b = 3;

  const std::size_t nearest = raw.argmax_neighbors.indices[0];
  const auto gallery = oracle::knn_oracle(bank.features(), 2, bank.row(nearest), 3, 1);
  ASSERT_EQ(gallery.indices.front(), nearest);
  std::vector<double> d;
  for (std::size_t i : gallery.indices) {
    d.push_back(oracle::euclidean(raw.argmax_feature, oracle::row(bank.features(), 2, i)));
  }
  const double want = oracle::image_score_oracle(1.2, d);
  EXPECT_NEAR(sc::image_score(raw, bank, cfg), want, 1e-12);
}

TEST(ImageScore, LofUsesMaxScore) {
  sc::RawScoreMap raw;
  raw.max_score = 3.25;
  const auto bank = pctest::bank_from_rows(1, {0, 1, 2});
  EXPECT_EQ(sc::image_score(raw, bank, config(sc::Scorer::lof, 1)), 3.25);
}

TEST(ScorerConfig, DefaultsAndNames) {
  const sc::ScorerConfig c;
  EXPECT_EQ(c.k, 100u);
  EXPECT_EQ(c.start_index, 2u);
  EXPECT_EQ(c.effective_b(), 100u);
  EXPECT_EQ(c.gaussian_sigma, 4.0);
  EXPECT_FALSE(c.clamp_weight);
  EXPECT_EQ(sc::default_k_for_ratio(1.0), 100u);
  EXPECT_EQ(sc::default_k_for_ratio(0.25), 25u);
  EXPECT_EQ(sc::default_k_for_ratio(0.1), 10u);
  EXPECT_EQ(sc::default_k_for_ratio(0.01), 5u);
  EXPECT_EQ(sc::parse_scorer("patchcore"), sc::Scorer::patch_core);
  EXPECT_EQ(sc::parse_scorer("patchcluster"), sc::Scorer::patch_cluster);
  EXPECT_EQ(sc::parse_scorer("lof"), sc::Scorer::lof);
  EXPECT_ERRC(sc::parse_scorer("spade"), invalid_argument);
}

TEST(ScoreFeatureMap, Deterministic) {
  std::mt19937_64 rng(10);
  const auto map = pctest::random_map(rng, 6, 6, 4);
  const auto bank = bk::assemble(std::vector{map});
  for (auto s : {sc::Scorer::patch_cluster, sc::Scorer::lof}) {
    auto c = config(s, 3);
    const auto a = sc::score_feature_map(bank, map, c);
    c.workers = 3;
    const auto b = sc::score_feature_map(bank, map, c);
    EXPECT_EQ(a.scores.values, b.scores.values);
  }
}
