#include "patchcluster/error.hpp"
#include "patchcluster/memory_bank.hpp"
#include "test_util.hpp"

namespace bk = patchcluster::bank;
namespace ft = patchcluster::features;
using pctest::TempDir;

TEST(Assemble, RowOrderAndProvenance) {
  std::mt19937_64 rng(1);
  const std::vector<ft::PatchFeatureMap> maps{pctest::random_map(rng, 2, 2, 3, "a"),
                                              pctest::random_map(rng, 3, 1, 3, "b")};
  const auto bank = bk::assemble(maps);
  ASSERT_EQ(bank.size(), 7u);
  EXPECT_EQ(bank.dim(), 3u);
  const std::vector<bk::Provenance> expect{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1},
                                           {1, 0, 0}, {1, 1, 0}, {1, 2, 0}};
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(bank.provenance(i), expect[i]) << i;
    const auto& p = bank.provenance(i);
    const auto src = maps[p.image].grid.at(p.w, p.h);
    const auto row = bank.row(i);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), src.begin()));
  }
  EXPECT_EQ(bank.image_id_of(5), "b");
}

TEST(Assemble, TestSettingRowCount) {
  std::vector<ft::PatchFeatureMap> maps(114);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    maps[i].image_id = std::to_string(i);
    maps[i].grid = patchcluster::VectorGrid(28, 28, 1);
  }
  EXPECT_EQ(bk::assemble(maps).size(), 89376u);
}

TEST(Assemble, Errors) {
  EXPECT_ERRC(bk::assemble({}), invalid_argument);
  std::mt19937_64 rng(2);
  const std::vector<ft::PatchFeatureMap> maps{pctest::random_map(rng, 2, 2, 3),
                                              pctest::random_map(rng, 2, 2, 4)};
  EXPECT_ERRC(bk::assemble(maps), shape_mismatch);
}

TEST(MemoryBank, Invariants) {
  EXPECT_ERRC(bk::MemoryBank(2, {}, {}, {"a"}), invalid_argument);
  EXPECT_ERRC(bk::MemoryBank(2, {1, 2, 3, 4}, {{0, 0, 0}}, {"a"}), shape_mismatch);
  EXPECT_ERRC(bk::MemoryBank(1, {std::nanf("")}, {{0, 0, 0}}, {"a"}), invalid_argument);
  EXPECT_ERRC(bk::MemoryBank(1, {1}, {{3, 0, 0}}, {"a"}), invalid_argument);
}

TEST(MemoryBank, SaveLoadRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(3);
  const std::vector<ft::PatchFeatureMap> maps{pctest::random_map(rng, 3, 2, 4, "x"),
                                              pctest::random_map(rng, 3, 2, 4, "y")};
  const auto full = bk::assemble(maps);
  const std::vector<std::size_t> rows{7, 1, 4};
  const auto bank = full.select(rows, {0.25, 42, 16});
  bk::save_bank(bank, dir / "bank.pcfb");
  EXPECT_TRUE(std::filesystem::exists(bk::sidecar_path(dir / "bank.pcfb")));

  const auto back = bk::load_bank(dir / "bank.pcfb");
  EXPECT_EQ(back.size(), 3u);
  EXPECT_TRUE(std::equal(back.features().begin(), back.features().end(),
                         bank.features().begin()));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.provenance(i), bank.provenance(i));
    EXPECT_EQ(back.image_id_of(i), bank.image_id_of(i));
  }
  EXPECT_EQ(back.image_id_of(0), "y");
  EXPECT_DOUBLE_EQ(back.metadata().subsample_ratio, 0.25);
  EXPECT_EQ(back.metadata().seed, 42u);
  EXPECT_EQ(back.metadata().projection_dim, std::optional<std::size_t>(16));
}

TEST(MemoryBank, MissingSidecar) {
  TempDir dir;
  std::mt19937_64 rng(4);
  const std::vector<ft::PatchFeatureMap> maps{pctest::random_map(rng, 2, 2, 2)};
  bk::save_bank(bk::assemble(maps), dir / "b.pcfb");
  std::filesystem::remove(bk::sidecar_path(dir / "b.pcfb"));
  EXPECT_ERRC(bk::load_bank(dir / "b.pcfb"), missing_input);
}
