// The reference implementations reproduce the hand-derived examples.
#include <chrono>

#include "patchcluster/coreset.hpp"
#include "patchcluster/knn.hpp"
#include "patchcluster/metrics.hpp"
#include "patchcluster/oracles.hpp"
#include "patchcluster/scoring.hpp"
#include "test_util.hpp"

namespace oracle = patchcluster::oracle;
using patchcluster::Mask;
using patchcluster::ScalarImage;

TEST(Oracles, KnnExamples) {
  const std::vector<float> pts{0, 0, 1, 0, 3, 0};
  const std::vector<float> q{0, 0};
  EXPECT_EQ(oracle::knn_oracle(pts, 2, q, 2, 1).distances, (std::vector<double>{0, 1}));
  EXPECT_EQ(oracle::knn_oracle(pts, 2, q, 2, 2).distances, (std::vector<double>{1, 3}));
}

TEST(Oracles, GreedyExample) {
  const std::vector<float> pts{0, 1, 10};
  EXPECT_EQ(oracle::greedy_oracle(pts, 1, 2, 0), (std::vector<std::size_t>{0, 2}));
}

TEST(Oracles, AurocExample) {
  const std::vector<float> s{0.1f, 0.4f, 0.35f, 0.8f};
  const std::vector<std::uint8_t> l{0, 0, 1, 1};
  EXPECT_EQ(oracle::auroc_oracle(s, l), 0.75);
}

TEST(Oracles, PatchScoreExample) {
  // Neighbours at distances 1, 2 and 6 from the origin.
  const std::vector<float> pts{1, 0, 0, 2, 6, 0, 50, 50};
  const std::vector<float> q{0, 0};
  EXPECT_DOUBLE_EQ(oracle::patch_score_oracle(pts, 2, q, 3, 1), 3.0);
}

TEST(Oracles, ImageScoreSymmetric) {
  const std::vector<double> d(4, 2.0);
  EXPECT_NEAR(oracle::image_score_oracle(2.0, d), 0.75 * 2.0, 1e-15);
}

TEST(Oracles, ComponentsDiagonal) {
  Mask m(3, 3);
  m.at(0, 0) = m.at(1, 1) = m.at(2, 0) = 1;
  EXPECT_EQ(oracle::component_count_oracle(m), 1u);
  Mask two(1, 3);
  two.at(0, 0) = two.at(0, 2) = 1;
  EXPECT_EQ(oracle::component_count_oracle(two), 2u);
}

TEST(Oracles, ProPerfectAndConstant) {
  Mask m(4, 4);
  m.at(1, 1) = m.at(2, 2) = m.at(0, 3) = 1;
  ScalarImage perfect(4, 4);
  for (std::size_t i = 0; i < 16; ++i) perfect.data[i] = m.data[i];
  const std::vector<Mask> masks{m};
  EXPECT_DOUBLE_EQ(oracle::pro_oracle_dense(std::vector{perfect}, masks, 0.3), 1.0);
  EXPECT_NEAR(oracle::pro_oracle_dense(std::vector{ScalarImage(4, 4, 1.0f)}, masks, 0.3), 0.15,
              1e-15);
}

TEST(Oracles, LofLattice) {
  std::vector<float> pts;
  for (int i = 0; i < 11; ++i) pts.push_back(static_cast<float>(i));
  const std::vector<float> q{5};
  EXPECT_NEAR(oracle::lof_oracle(pts, 1, q, 2, 2), 1.0, 1e-12);
}

// Cross-validation: each oracle against its library counterpart on 500
// seeded instances.
namespace {

constexpr int kInstances = 500;

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Mask random_mask(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  Mask m(h, w);
  std::bernoulli_distribution on(0.35);
  for (auto& v : m.data) v = on(rng);
  return m;
}

}  // namespace

TEST(OracleCrossCheck, Knn) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = pick(rng, 1, 200), d = pick(rng, 1, 16);
    const auto rows = pctest::random_floats(rng, n * d);
    const auto bank = pctest::bank_from_rows(d, rows);
    const std::size_t start = pick(rng, 1, std::min<std::size_t>(2, n));
    const std::size_t k = pick(rng, 1, n - start + 1);
    const auto q = pctest::random_floats(rng, d);
    const auto want = oracle::knn_oracle(rows, d, q, k, start);
    const auto got = patchcluster::bank::query_knn_batch(bank, q, k, start);
    ASSERT_EQ(got[0].indices, want.indices) << "instance " << t;
    ASSERT_EQ(got[0].distances, want.distances) << "instance " << t;
  }
}

TEST(OracleCrossCheck, Greedy) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = pick(rng, 1, 60), d = pick(rng, 1, 8);
    const auto rows = pctest::random_floats(rng, n * d);
    const std::size_t m = pick(rng, 1, n);
    const std::uint64_t seed = rng();
    EXPECT_EQ(patchcluster::bank::greedy_kcenter(pctest::bank_from_rows(d, rows), m, seed),
              oracle::greedy_oracle(rows, d, m, seed))
        << "instance " << t;
  }
}

TEST(OracleCrossCheck, Auroc) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = pick(rng, 2, 300);
    std::vector<float> s(n);
    std::vector<std::uint8_t> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<float>(pick(rng, 0, 20));
      l[i] = static_cast<std::uint8_t>(pick(rng, 0, 1));
    }
    l[0] = 0;
    l[1] = 1;
    EXPECT_NEAR(patchcluster::eval::auroc(s, l), oracle::auroc_oracle(s, l), 1e-12);
  }
}

TEST(OracleCrossCheck, Components) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < kInstances; ++t) {
    const auto m = random_mask(rng, pick(rng, 1, 20), pick(rng, 1, 20));
    const auto regions = patchcluster::eval::connected_components(m);
    std::vector<std::size_t> labels(m.data.size(), 0);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      for (std::size_t p : regions[r].pixels) labels[p] = r + 1;
    }
    EXPECT_EQ(labels, oracle::component_labels_oracle(m)) << "instance " << t;
  }
}

TEST(OracleCrossCheck, Pro) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t h = pick(rng, 2, 12), w = pick(rng, 2, 12);
    std::vector<ScalarImage> maps;
    std::vector<Mask> masks;
    for (std::size_t i = 0, imgs = pick(rng, 1, 3); i < imgs; ++i) {
      ScalarImage s(h, w);
      s.data = pctest::random_floats(rng, h * w, 0.0f, 1.0f);
      maps.push_back(std::move(s));
      masks.push_back(random_mask(rng, h, w));
    }
    masks[0].data[0] = 1;
    masks[0].data[1] = 0;
    const auto th = patchcluster::eval::quantile_thresholds(maps, pick(rng, 2, 50));
    EXPECT_NEAR(patchcluster::eval::pro_score_at(maps, masks, th),
                oracle::pro_oracle(maps, masks, th, 0.3), 1e-9)
        << "instance " << t;
  }
}

TEST(OracleCrossCheck, PatchAndImageScore) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> dist(0.0, 30.0);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = pick(rng, 3, 150), d = pick(rng, 1, 16);
    const auto rows = pctest::random_floats(rng, n * d);
    const auto bank = pctest::bank_from_rows(d, rows);
    const std::size_t start = pick(rng, 1, 2), k = pick(rng, 1, n - start + 1);
    const auto q = pctest::random_floats(rng, d);
    const double want = oracle::patch_score_oracle(rows, d, q, k, start);
    EXPECT_NEAR(patchcluster::scoring::patch_score(patchcluster::bank::query_knn(bank, q, k, start)),
                want, 1e-12 * std::max(1.0, want));

    std::vector<double> ds(pick(rng, 1, 50));
    for (auto& x : ds) x = dist(rng);
    const double a = dist(rng);
    const double img = oracle::image_score_oracle(a, ds);
    EXPECT_NEAR(patchcluster::scoring::reweighted_score(a, ds, false), img,
                1e-12 * std::max(1.0, std::abs(img)));
  }
}

TEST(OracleCrossCheck, Lof) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = pick(rng, 4, 40), d = pick(rng, 1, 4);
    const auto rows = pctest::random_floats(rng, n * d);
    const auto bank = pctest::bank_from_rows(d, rows);
    const std::size_t k = pick(rng, 1, n - 2);
    const auto q = pctest::random_floats(rng, d);
    const double got = patchcluster::scoring::lof_score(bank, q, k, 1);
    EXPECT_NEAR(got, oracle::lof_oracle(rows, d, q, k, 1), 1e-9 * got) << "instance " << t;
  }
}

TEST(OracleCrossCheck, RuntimeAtTestSizes) {
  std::mt19937_64 rng(18);
  const auto rows = pctest::random_floats(rng, 5000 * 64);
  const auto q = pctest::random_floats(rng, 64);
  const auto t0 = std::chrono::steady_clock::now();
  oracle::knn_oracle(rows, 64, q, 100, 2);
  oracle::patch_score_oracle(rows, 64, q, 100, 2);
  oracle::greedy_oracle(std::span(rows).first(1000 * 64), 64, 50, 0);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 10.0);
}
