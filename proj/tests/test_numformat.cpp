#include <gtest/gtest.h>

#include <random>

#include "fc2t/numformat.hpp"

using namespace fc2t;

TEST(FormatTick, Examples) {
  EXPECT_EQ(format_tick(7000, FormatKind::Comma), "7,000");
  EXPECT_EQ(format_tick(7000000, FormatKind::Scientific), "7.00e+6");
  EXPECT_EQ(format_tick(7000, FormatKind::Abbrev), "7K");
  EXPECT_EQ(format_tick(0, FormatKind::Abbrev), "0");
}

TEST(FormatTick, Plain) {
  EXPECT_EQ(format_tick(0, FormatKind::Plain), "0");
  EXPECT_EQ(format_tick(10, FormatKind::Plain), "10");
  EXPECT_EQ(format_tick(0.4, FormatKind::Plain), "0.4");
  EXPECT_EQ(format_tick(0.025, FormatKind::Plain), "0.025");
  EXPECT_EQ(format_tick(-6, FormatKind::Plain), "-6");
  EXPECT_EQ(format_tick(1e16, FormatKind::Plain), "10000000000000000");
}

TEST(FormatTick, Comma) {
  EXPECT_EQ(format_tick(999, FormatKind::Comma), "999");
  EXPECT_EQ(format_tick(1234567.5, FormatKind::Comma), "1,234,567.5");
  EXPECT_EQ(format_tick(-60000, FormatKind::Comma), "-60,000");
  EXPECT_EQ(format_tick(0.25, FormatKind::Comma), "0.25");
}

TEST(FormatTick, Scientific) {
  EXPECT_EQ(format_tick(0, FormatKind::Scientific), "0.00e+0");
  EXPECT_EQ(format_tick(10, FormatKind::Scientific), "1.00e+1");
  EXPECT_EQ(format_tick(0.025, FormatKind::Scientific), "2.50e-2");
  EXPECT_EQ(format_tick(-1.25e7, FormatKind::Scientific), "-1.25e+7");
  EXPECT_EQ(format_tick(123456, NumberFormat{FormatKind::Scientific, 3}), "1.235e+5");
}

TEST(FormatTick, Abbrev) {
  EXPECT_EQ(format_tick(1250000, FormatKind::Abbrev), "1.25M");
  EXPECT_EQ(format_tick(2500, FormatKind::Abbrev), "2.5K");
  EXPECT_EQ(format_tick(3e9, FormatKind::Abbrev), "3B");
  EXPECT_EQ(format_tick(4e12, FormatKind::Abbrev), "4T");
  EXPECT_EQ(format_tick(500, FormatKind::Abbrev), "500");
  EXPECT_EQ(format_tick(0.025, FormatKind::Abbrev), "0.025");
  EXPECT_EQ(format_tick(-6000, FormatKind::Abbrev), "-6K");
}

TEST(ParseNumber, SpecExamples) {
  EXPECT_EQ(parse_number("7,000"), 7000);
  EXPECT_EQ(parse_number("7.00e+6"), 7000000);
  EXPECT_EQ(parse_number("3.5M"), 3500000);
  EXPECT_EQ(parse_number("7K"), 7000);
  EXPECT_THROW(parse_number("abc"), ParseError);
}

TEST(ParseNumber, Variants) {
  EXPECT_EQ(parse_number("7.00e + 6"), 7000000);
  EXPECT_EQ(parse_number("7.00E6"), 7000000);
  EXPECT_EQ(parse_number("2.5e-2"), 0.025);
  EXPECT_EQ(parse_number("  -12.5 "), -12.5);
  EXPECT_EQ(parse_number("\xe2\x88\x92" "4"), -4);  // U+2212 minus
  EXPECT_EQ(parse_number("1.2 k"), 1200);
  EXPECT_EQ(parse_number("4t"), 4e12);
  EXPECT_EQ(parse_number("45%"), 45);
  EXPECT_EQ(parse_number("+3"), 3);
  EXPECT_EQ(parse_number("1,234,567.89"), 1234567.89);
  EXPECT_EQ(parse_number(".5"), 0.5);
}

TEST(ParseNumber, RejectsMalformed) {
  for (const char* bad : {"", "  ", "1,23", "12,3456", "1..2", "e5", "1e", "--3", "3MK", "7 000", "1,000,00", "NaN"}) {
    EXPECT_THROW(parse_number(bad), ParseError) << bad;
  }
  try {
    parse_number("12x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.token(), "12x");
  }
}

TEST(ParseNumber, PlainIntegersExact) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = static_cast<double>(static_cast<std::int64_t>(rng() % (std::uint64_t{1} << 53)));
    EXPECT_EQ(parse_number(format_tick(v, FormatKind::Plain)), v);
    EXPECT_EQ(parse_number(format_tick(-v, FormatKind::Comma)), -v);
  }
}

TEST(ParseNumber, RoundTripAcrossMagnitudes) {
  // nice-number tick values across all generated magnitudes
  for (int k = -3; k <= 17; ++k)
    for (double m : {1.0, 2.0, 2.5, 4.0, 5.0, 7.5}) {
      const double v = m * std::pow(10.0, k);
      for (auto f : kFormatKinds) {
        const double back = parse_number(format_tick(v, f));
        EXPECT_NEAR(back, v, 1e-6 * v) << format_tick(v, f);
      }
    }
}
