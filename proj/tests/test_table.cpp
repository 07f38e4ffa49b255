#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fc2t/table.hpp"

using namespace fc2t;

namespace {
DataTable grid3() {
  DataTable t;
  t.id = "t";
  t.row_headers = {"2018", "2019", "2020"};
  t.col_headers = {"A", "B", "C"};
  t.cells = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}, {7.0, 8.0, 9.0}};
  return t;
}

bool has(const std::vector<Violation>& v, ViolationKind k) {
  for (const auto& x : v)
    if (x.kind == k) return true;
  return false;
}
}  // namespace

TEST(DigitLength, SpecExamples) {
  EXPECT_EQ(digit_length(0.5), 0);
  EXPECT_EQ(digit_length(7000), 4);
  EXPECT_EQ(digit_length(-250), 3);
  EXPECT_EQ(digit_length(1.0), 1);
  EXPECT_EQ(digit_length(0.0), 0);
}

TEST(DigitLength, PowerOfTenBoundaries) {
  // 10^(d-1) is the first value of length d, the value just below it is d-1.
  for (int d = 1; d <= 16; ++d) {
    const double p = std::pow(10.0, d - 1);
    EXPECT_EQ(digit_length(p), d) << p;
    EXPECT_EQ(digit_length(std::nextafter(p, 0.0)), d - 1) << p;
  }
  EXPECT_EQ(digit_length(9.999999), 1);
  EXPECT_EQ(digit_length(0.999999), 0);
}

TEST(DigitLength, SymmetricAndMonotone) {
  double prev = 0;
  int prev_dl = 0;
  for (double x = 1e-3; x < 1e17; x *= 1.37) {
    EXPECT_EQ(digit_length(x), digit_length(-x));
    EXPECT_GE(digit_length(x), prev_dl);
    prev_dl = digit_length(x);
    prev = x;
  }
  (void)prev;
}

TEST(DigitLength, RejectsNonFinite) {
  EXPECT_THROW(digit_length(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(digit_length(std::nan("")), DomainError);
}

TEST(ValidateTable, WellFormedIsEmpty) { EXPECT_TRUE(validate_table(grid3()).empty()); }

TEST(ValidateTable, RaggedRow) {
  auto t = grid3();
  t.cells[1].pop_back();
  const auto v = validate_table(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::RaggedGrid);
}

TEST(ValidateTable, DuplicateEntity) {
  auto t = grid3();
  t.col_headers[2] = "A";
  const auto v = validate_table(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::DuplicateHeader);
}

TEST(ValidateTable, NonFiniteAndAbsent) {
  auto t = grid3();
  t.cells[0][0] = std::numeric_limits<double>::infinity();
  t.cells[2][2].reset();
  const auto gt = validate_table(t, TableRole::GroundTruth);
  EXPECT_TRUE(has(gt, ViolationKind::NonFiniteCell));
  EXPECT_TRUE(has(gt, ViolationKind::AbsentCell));
  // predictions may carry absent cells
  const auto pred = validate_table(t, TableRole::Prediction);
  EXPECT_TRUE(has(pred, ViolationKind::NonFiniteCell));
  EXPECT_FALSE(has(pred, ViolationKind::AbsentCell));
}

TEST(ValidateTable, EntityCountLimit) {
  DataTable t;
  t.row_headers = {"x"};
  for (int i = 0; i < 7; ++i) t.col_headers.push_back("e" + std::to_string(i));
  t.cells = {std::vector<Cell>(7, 1.0)};
  EXPECT_TRUE(has(validate_table(t, TableRole::GroundTruth), ViolationKind::EntityCount));
}

TEST(TableJson, RoundTripWithAbsentCells) {
  auto t = grid3();
  t.cells[1][1].reset();
  const json j = t;
  EXPECT_TRUE(j["cells"][1][1].is_null());
  EXPECT_EQ(j.get<DataTable>(), t);
}

TEST(AxisSpec, ValidationAndJson) {
  AxisSpec a;
  a.tick_values = {0, 2, 4, 6, 8, 10};
  a.major_interval = 2;
  a.minor_estimate_t = 0.4;
  EXPECT_TRUE(validate_axis(a).empty());
  EXPECT_EQ(a.n_major_ticks(), 6);
  EXPECT_EQ(json(a).get<AxisSpec>(), a);
  a.tick_values[3] = 6.5;
  EXPECT_FALSE(validate_axis(a).empty());
}

TEST(Enums, StringsRoundTrip) {
  for (auto c : kConditions) EXPECT_EQ(condition_from_string(to_string(c)), c);
  for (auto c : kChartTypes) EXPECT_EQ(chart_type_from_string(to_string(c)), c);
  for (auto f : kFormatKinds) EXPECT_EQ(format_from_string(to_string(f)), f);
  EXPECT_EQ(part_from_string("a"), Part::A);
  EXPECT_THROW(condition_from_string("sideways"), ConfigError);
  EXPECT_EQ(part_of(Condition::Ticks11), Part::B);
  EXPECT_EQ(part_of(Condition::Ext), Part::C);
  EXPECT_EQ(part_of(Condition::Abbr), Part::D);
}
