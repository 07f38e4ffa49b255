#include <gtest/gtest.h>

#include "fc2t/parse.hpp"

using namespace fc2t;

TEST(Parse, Linearized) {
  const auto p = parse_prediction("Year | A | B\n2018 | 1 | 2\n2019 | 3 | 4");
  EXPECT_EQ(p.diagnostics.dialect_detected, Dialect::Linearized);
  EXPECT_EQ(p.table.col_headers, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.table.row_headers, (std::vector<std::string>{"2018", "2019"}));
  ASSERT_EQ(p.table.cells.size(), 2u);
  EXPECT_EQ(p.table.cells[1][1], Cell(4.0));
  EXPECT_EQ(p.diagnostics.unparsed_cells, 0u);
}

TEST(Parse, MarkdownWithGrouping) {
  const auto p = parse_prediction("| Year | Sales |\n|---|---|\n| 2018 | 7,000 |\n| 2019 | 1.5K |");
  EXPECT_EQ(p.diagnostics.dialect_detected, Dialect::Markdown);
  EXPECT_EQ(p.table.cells[0][0], Cell(7000.0));
  EXPECT_EQ(p.table.cells[1][0], Cell(1500.0));
  EXPECT_EQ(p.diagnostics.dropped_lines, 1u);
}

TEST(Parse, ProseFails) {
  const auto p = parse_prediction("The chart shows sales rising steadily over four years.");
  EXPECT_EQ(p.diagnostics.dialect_detected, Dialect::Failed);
  EXPECT_EQ(p.table.size(), 0u);
}

TEST(Parse, DelimiterFree) {
  const auto p = parse_prediction("Year\tA\tB\n2018\t1\t2\n2019\t3\t4");
  EXPECT_EQ(p.diagnostics.dialect_detected, Dialect::DelimiterFree);
  EXPECT_EQ(p.table.cells[1][0], Cell(3.0));
  const auto q = parse_prediction("Year    A    B\n2018    1    2");
  EXPECT_EQ(q.table.col_headers, (std::vector<std::string>{"A", "B"}));
}

TEST(Parse, EscapedNewlinesAndFences) {
  const auto p = parse_prediction("TITLE | Sales<0x0A>Year | A<0x0A>2018 | 5");
  EXPECT_EQ(p.table.col_headers, (std::vector<std::string>{"A"}));
  EXPECT_EQ(p.table.cells[0][0], Cell(5.0));
  const auto q = parse_prediction("Here you go:\n```\n| x | a |\n|---|---|\n| r | 2 |\n```\nDone.");
  EXPECT_EQ(q.table.cells[0][0], Cell(2.0));
  EXPECT_EQ(q.diagnostics.dropped_lines, 5u);
}

TEST(Parse, AbsentAndUnparseableCells) {
  const auto p = parse_prediction("c | A | B | C\nr1 | 1 | n/a\nr2 | 2 | 3 | 4");
  EXPECT_FALSE(p.table.cells[0][1].has_value());
  EXPECT_FALSE(p.table.cells[0][2].has_value());
  EXPECT_EQ(p.diagnostics.unparsed_cells, 2u);
  EXPECT_EQ(p.table.cells[1][2], Cell(4.0));
}

TEST(Parse, HeaderWithoutCorner) {
  const auto p = parse_prediction("A | B\nr1 | 1 | 2");
  EXPECT_EQ(p.table.col_headers, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.table.cells[0][1], Cell(2.0));
}

TEST(Parse, LargestBlockWins) {
  const auto p = parse_prediction("a | b\nx | 1\n\nc | d | e\ny | 1 | 2\nz | 3 | 4");
  EXPECT_EQ(p.table.size(), 4u);
}

TEST(Parse, Transpose) {
  ParseOptions o;
  o.transpose = true;
  const auto p = parse_prediction("c | A | B\nr1 | 1 | 2", o);
  EXPECT_TRUE(p.diagnostics.orientation_transposed);
  EXPECT_EQ(p.table.row_headers, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.table.cells[1][0], Cell(2.0));
}

TEST(Parse, LinearizedRoundTrip) {
  DataTable t;
  t.row_headers = {"2018", "2019"};
  t.col_headers = {"Series A", "Series B"};
  t.cells = {{0.1, 123456789012.0}, {-2.5e-7, Cell{}}};
  const auto p = parse_prediction(to_linearized(t));
  EXPECT_EQ(p.table.row_headers, t.row_headers);
  EXPECT_EQ(p.table.col_headers, t.col_headers);
  EXPECT_EQ(p.table.cells, t.cells);
}

TEST(CanonicalizeHeader, Examples) {
  EXPECT_EQ(canonicalize_header("  GDP (USD) "), "gdp (usd)");
  EXPECT_EQ(canonicalize_header("Category_A"), "category_a");
  EXPECT_EQ(canonicalize_header("**Series   B:**"), "series b");
  EXPECT_EQ(canonicalize_header(""), "");
  EXPECT_EQ(canonicalize_header("Share %"), "share %");
}
