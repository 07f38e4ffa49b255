#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fc2t/benchmark.hpp"

using namespace fc2t;

namespace {

DataTable table_with_max(double max_cell) {
  DataTable t;
  t.id = "fx";
  t.row_headers = {"2018", "2019"};
  t.col_headers = {"A", "B"};
  t.cells = {{1.5, max_cell}, {3.25, 2.0}};
  return t;
}

// Independent oracle: enumerate m * 10^k for a wide k range and keep the smallest >= x.
double nice_oracle(double x) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = -20; k <= 20; ++k)
    for (double m : {1.0, 2.0, 2.5, 5.0}) {
      const double c = std::stod(std::to_string(m) + "e" + std::to_string(k));
      if (c >= x) best = std::min(best, c);
    }
  return best;
}

const Manifest& default_manifest() {
  static const Manifest m = generate_manifest(GenConfig{});
  return m;
}

}  // namespace

TEST(BaseTables, DefaultShapeAndRange) {
  const auto tables = generate_base_tables(GenConfig{});
  ASSERT_EQ(tables.size(), 60u);
  std::map<std::size_t, int> per_entities;
  for (const auto& t : tables) {
    ++per_entities[t.cols()];
    EXPECT_EQ(t.rows(), 4u);
    for (const auto& row : t.cells)
      for (const auto& c : row) {
        ASSERT_TRUE(c.has_value());
        EXPECT_GE(*c, 1.0);
        EXPECT_LT(*c, 10.0);
        EXPECT_EQ(digit_length(*c), 1);
      }
  }
  for (std::size_t e = 1; e <= 6; ++e) EXPECT_EQ(per_entities[e], 10);
}

TEST(BaseTables, SingleEntityCountConfig) {
  GenConfig c;
  c.entity_counts = {3};
  const auto tables = generate_base_tables(c);
  ASSERT_EQ(tables.size(), 10u);
  for (const auto& t : tables) EXPECT_EQ(t.cols(), 3u);
}

TEST(BaseTables, DeterministicPerSeed) {
  GenConfig a, b;
  EXPECT_EQ(json(generate_base_tables(a)).dump(), json(generate_base_tables(b)).dump());
  b.seed = a.seed + 1;
  EXPECT_NE(json(generate_base_tables(a)).dump(), json(generate_base_tables(b)).dump());
}

TEST(ScaleTable, Examples) {
  DataTable t = table_with_max(7.3);
  EXPECT_EQ(*scale_table(t, 4).cells[0][1], 7300.0);
  EXPECT_EQ(*scale_table(t, 0).cells[0][1], 0.73);
  EXPECT_EQ(*scale_table(t, 1).cells[0][1], 7.3);
  EXPECT_EQ(scale_table(t, 1).row_headers, t.row_headers);
  EXPECT_NE(scale_table(t, 4).id, scale_table(t, 5).id);
}

TEST(ScaleTable, ScalingLawAllLengths) {
  const auto tables = generate_base_tables(GenConfig{});
  for (int dl = 0; dl <= 16; ++dl) {
    const DataTable scaled = scale_table(tables[17], dl);
    for (const auto& row : scaled.cells)
      for (const auto& c : row) EXPECT_EQ(digit_length(*c), dl);
  }
}

TEST(ScaleTable, RejectsNonSingleDigitCells) {
  EXPECT_THROW(scale_table(table_with_max(12.0), 3), DomainError);
}

TEST(DeriveAxis, Examples) {
  const auto six = derive_axis(table_with_max(9.1), 6);
  EXPECT_EQ(six.tick_values, (std::vector<double>{0, 2, 4, 6, 8, 10}));
  EXPECT_EQ(six.major_interval, 2.0);
  EXPECT_EQ(six.minor_estimate_t, 0.4);
  const auto three = derive_axis(table_with_max(9.1), 3);
  EXPECT_EQ(three.tick_values, (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(three.minor_estimate_t, 1.0);
  EXPECT_EQ(derive_axis(table_with_max(10.0), 6).max_tick(), 10.0);
  const auto eleven = derive_axis(table_with_max(9.1), 11);
  EXPECT_EQ(eleven.n_major_ticks(), 11);
  EXPECT_EQ(eleven.major_interval, 1.0);
  EXPECT_TRUE(validate_axis(eleven).empty());
}

TEST(DeriveAxis, Errors) {
  EXPECT_THROW(derive_axis(table_with_max(9.1), 4), DomainError);
  DataTable zeros = table_with_max(0.0);
  zeros.cells = {{0.0, 0.0}, {0.0, 0.0}};
  EXPECT_THROW(derive_axis(zeros, 6), DomainError);
  EXPECT_THROW(derive_axis(DataTable{}, 6), DomainError);
}

TEST(DeriveAxis, NiceMaximumMatchesEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(1.0, 10.0);
  std::uniform_int_distribution<int> expo(-3, 16);
  for (int i = 0; i < 3000; ++i) {
    const double x = mant(rng) * std::pow(10.0, expo(rng));
    EXPECT_EQ(detail::nice_maximum(x).to_double(), nice_oracle(x)) << x;
  }
  for (double x : {1.0, 2.0, 2.5, 5.0, 10.0, 0.25, 2.0000001, 5e15})
    EXPECT_EQ(detail::nice_maximum(x).to_double(), nice_oracle(x)) << x;
}

TEST(ShiftRange, Examples) {
  const DataTable t = table_with_max(9.1);
  const AxisSpec base = derive_axis(t, 6);
  auto [pos, pos_axis] = shift_range(t, base, RangeVariant::Pos);
  EXPECT_EQ(*pos.cells[0][1], 15.1);
  EXPECT_EQ(pos_axis.min_tick(), 6.0);
  EXPECT_EQ(pos_axis.max_tick(), 16.0);
  auto [neg, neg_axis] = shift_range(t, base, RangeVariant::Neg);
  EXPECT_NEAR(*neg.cells[0][1], 3.1, 1e-12);
  EXPECT_EQ(neg_axis.min_tick(), -6.0);
  EXPECT_LT(neg_axis.min_tick(), 0.0);
  auto [ext, ext_axis] = shift_range(t, base, RangeVariant::Ext);
  EXPECT_EQ(ext, t);
  EXPECT_EQ(ext_axis.max_tick(), 20.0);
  EXPECT_EQ(ext_axis.minor_estimate_t, 0.8);
  EXPECT_EQ(ext_axis.n_major_ticks(), 6);
}

TEST(ShiftRange, PreservesDifferencesAndRejectsShifted) {
  const DataTable t = table_with_max(9.1);
  const AxisSpec base = derive_axis(t, 6);
  auto [pos, pos_axis] = shift_range(t, base, RangeVariant::Pos);
  EXPECT_NEAR(*pos.cells[0][1] - *pos.cells[1][0], *t.cells[0][1] - *t.cells[1][0], 1e-12);
  EXPECT_THROW(shift_range(pos, pos_axis, RangeVariant::Neg), DomainError);
  AxisSpec three = derive_axis(t, 3);
  EXPECT_THROW(shift_range(t, three, RangeVariant::Pos), DomainError);
}

TEST(Manifest, CountAlgebra) {
  const Manifest& m = default_manifest();
  std::map<Part, std::size_t> per_part;
  std::map<Condition, std::size_t> per_cond;
  for (const auto& it : m.items) {
    ++per_part[it.part];
    ++per_cond[it.condition];
  }
  EXPECT_EQ(m.items.size(), 7140u);
  EXPECT_EQ(per_part[Part::A], 3060u);
  EXPECT_EQ(per_part[Part::B], 2u * 170 * 3);
  EXPECT_EQ(per_part[Part::C], 3u * 170 * 3);
  EXPECT_EQ(per_part[Part::D], 3u * 170 * 3);
  for (auto c : kConditions)
    if (c != Condition::Base) {
      EXPECT_EQ(per_cond[c], 510u) << to_string(c);
    }
  EXPECT_EQ(count_source_tables(m), 1020u);
}

TEST(Manifest, ItemsAreValidAndIdsUnique) {
  const Manifest& m = default_manifest();
  std::set<std::string> ids;
  for (const auto& it : m.items) {
    EXPECT_TRUE(ids.insert(it.id).second) << it.id;
    const auto problems = validate_item(it, m.table_for(it));
    EXPECT_TRUE(problems.empty()) << it.id << ": " << (problems.empty() ? "" : problems.front());
  }
}

TEST(Manifest, PartAOneDigitLengthPerTable) {
  const Manifest& m = default_manifest();
  std::map<int, std::size_t> per_dl;
  for (const auto& it : m.items) {
    if (it.part != Part::A) continue;
    ++per_dl[it.digit_length];
    for (const auto& row : m.table_for(it).cells)
      for (const auto& c : row) ASSERT_EQ(digit_length(*c), it.digit_length) << it.id;
  }
  ASSERT_EQ(per_dl.size(), 17u);
  for (const auto& [dl, n] : per_dl) EXPECT_EQ(n, 180u) << dl;
}

TEST(Manifest, DeterministicAndConfigurable) {
  EXPECT_EQ(json(generate_manifest(GenConfig{}).items).dump(), json(default_manifest().items).dump());
  GenConfig only_a;
  only_a.parts = {Part::A};
  EXPECT_EQ(generate_manifest(only_a).items.size(), 3060u);
  GenConfig bad;
  bad.entity_counts = {1, 2};
  EXPECT_THROW(generate_manifest(bad), ConfigError);
}

TEST(Filter, ParseAndApply) {
  const auto f = ItemFilter::parse("part=A,B,digit_length=0..2,chart=line");
  EXPECT_EQ(f.parts, (std::set<Part>{Part::A, Part::B}));
  EXPECT_EQ(f.digit_lengths, (std::set<int>{0, 1, 2}));
  const Manifest sub = filter_manifest(default_manifest(), ItemFilter::parse("part=A,digit_length=0..2"));
  EXPECT_EQ(sub.items.size(), 540u);
  for (const auto& it : sub.items) EXPECT_NO_THROW(sub.table_for(it));
  EXPECT_THROW(ItemFilter::parse("colour=red"), ConfigError);
  EXPECT_THROW(ItemFilter::parse("digit_length=5..2"), ConfigError);
  EXPECT_THROW(ItemFilter::parse("A"), ConfigError);
}

TEST(ManifestFile, RoundTripInlineAndSharded) {
  const auto dir = std::filesystem::temp_directory_path() / "fc2t_test_manifest";
  std::filesystem::remove_all(dir);
  const Manifest sub = filter_manifest(default_manifest(), ItemFilter::parse("part=C,digit_length=3"));
  for (bool shard : {false, true}) {
    const auto path = dir / (shard ? "sharded" : "inline") / "manifest.json";
    save_manifest(sub, path, shard);
    const Manifest back = load_manifest(path);
    EXPECT_EQ(json(back.items).dump(), json(sub.items).dump());
    EXPECT_EQ(back.ground_truth, sub.ground_truth);
    EXPECT_EQ(back.config, sub.config);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "sharded" / "tables"));
  write_text_file(dir / "bad.json", "{\"schema_version\": 99}");
  EXPECT_THROW(load_manifest(dir / "bad.json"), ConfigError);
  std::filesystem::remove_all(dir);
}
