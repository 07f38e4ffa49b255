#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "decimal.hpp"
#include "errors.hpp"
#include "table.hpp"

namespace fc2t {

struct NumberFormat {
  FormatKind kind = FormatKind::Plain;
  int scientific_mantissa_digits = 2;
};

struct AbbrevUnit {
  char suffix;
  int power_of_ten;
};

// Ascending by magnitude.
inline constexpr std::array<AbbrevUnit, 4> kAbbrevUnits{{{'K', 3}, {'M', 6}, {'B', 9}, {'T', 12}}};

namespace detail {

inline std::string trim_fraction_zeros(std::string s) {
  if (s.find('.') == std::string::npos) return s;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline std::string fixed_with_precision(double v, int precision) {
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

inline std::string plain(double v) {
  if (v == 0.0) return "0";  // also folds -0
  return fixed_repr(v);
}

inline std::string group_thousands(const std::string& s) {
  std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
  std::size_t end = s.find('.');
  if (end == std::string::npos) end = s.size();
  std::string int_part = s.substr(start, end - start);
  std::string grouped;
  const std::size_t n = int_part.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) grouped.push_back(',');
    grouped.push_back(int_part[i]);
  }
  return s.substr(0, start) + grouped + s.substr(end);
}

inline std::string scientific(double v, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, digits);
  std::string s(buf, res.ptr);
  // to_chars pads the exponent to two digits; the tick labels do not.
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  char sign = s[e + 1];
  std::string exp = s.substr(e + 2);
  while (exp.size() > 1 && exp.front() == '0') exp.erase(exp.begin());
  if (mantissa == "-0" || (v == 0.0 && mantissa.front() == '-')) mantissa.erase(mantissa.begin());
  return mantissa + "e" + sign + exp;
}

// Two fraction digits for |q| >= 1; below one, two significant digits after the
// leading zeros (0.025 stays "0.025").
inline std::string abbrev_number(double q) {
  if (q == 0.0) return "0";
  int precision = 2;
  const double a = std::abs(q);
  if (a < 1.0) precision = 2 + static_cast<int>(-std::floor(std::log10(a))) - 1;
  return trim_fraction_zeros(fixed_with_precision(q, precision));
}

inline std::string abbrev(double v) {
  const double a = std::abs(v);
  for (auto it = kAbbrevUnits.rbegin(); it != kAbbrevUnits.rend(); ++it) {
    const double unit = parse_double_exact("1e" + std::to_string(it->power_of_ten));
    if (a >= unit) {
      const double q = Decimal::from_double(v).shifted(-it->power_of_ten).to_double();
      return abbrev_number(q) + it->suffix;
    }
  }
  return abbrev_number(v);
}

}  // namespace detail

inline std::string format_tick(double v, const NumberFormat& fmt) {
  if (!std::isfinite(v)) throw DomainError("format_tick: non-finite value");
  switch (fmt.kind) {
    case FormatKind::Plain: return detail::plain(v);
    case FormatKind::Comma: return detail::group_thousands(detail::plain(v));
    case FormatKind::Scientific: return detail::scientific(v, fmt.scientific_mantissa_digits);
    case FormatKind::Abbrev: return detail::abbrev(v);
  }
  return detail::plain(v);
}

inline std::string format_tick(double v, FormatKind kind) { return format_tick(v, NumberFormat{kind}); }

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Validates "1,234,567.5" style grouping and returns the digits without commas.
inline std::optional<std::string> strip_grouping(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::string(s);
  std::size_t int_end = s.find_first_of(".eE");
  if (int_end == std::string_view::npos) int_end = s.size();
  if (s.find(',', int_end) != std::string_view::npos) return std::nullopt;
  std::string_view int_part = s.substr(0, int_end);
  const std::size_t first = int_part.find(',');
  if (first == 0 || first > 3) return std::nullopt;
  for (std::size_t i = 0; i < first; ++i)
    if (!is_digit(int_part[i])) return std::nullopt;
  // the remainder must be a sequence of ",ddd"
  if ((int_part.size() - first) % 4 != 0) return std::nullopt;
  for (std::size_t i = first; i < int_part.size(); i += 4) {
    if (int_part[i] != ',') return std::nullopt;
    for (std::size_t k = i + 1; k <= i + 3; ++k)
      if (!is_digit(int_part[k])) return std::nullopt;
  }
  std::string out;
  for (char c : s)
    if (c != ',') out.push_back(c);
  return out;
}

inline bool well_formed_unsigned(std::string_view s) {
  // digits [. digits] [e [+-] digits], at least one mantissa digit
  std::size_t i = 0, mant_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++mant_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++mant_digits;
  }
  if (mant_digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

}  // namespace detail

// Accepts plain, comma-grouped, scientific ("7.00e+6", "7.00e + 6") and abbreviated
// ("3.5M", "7 k") numbers with an optional sign and an optional trailing '%'
// (stripped, value not divided by 100).  Locale independent.
inline double parse_number(std::string_view input) {
  const std::string original(input);
  std::string s(detail::trim(input));
  // U+2212 MINUS SIGN
  for (std::size_t pos; (pos = s.find("\xE2\x88\x92")) != std::string::npos;) s.replace(pos, 3, "-");
  if (!s.empty() && s.back() == '%') s.pop_back();
  s = std::string(detail::trim(s));
  if (s.empty()) throw ParseError(original);

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.erase(s.begin());
    s = std::string(detail::trim(s));
  }

  int unit_power = 0;
  if (!s.empty()) {
    const char last = static_cast<char>(std::toupper(static_cast<unsigned char>(s.back())));
    for (const auto& u : kAbbrevUnits) {
      if (u.suffix == last) {
        unit_power = u.power_of_ten;
        s.pop_back();
        s = std::string(detail::trim(s));
        break;
      }
    }
  }

  // Spaces are tolerated only around the exponent marker and its sign.
  if (s.find_first_of("eE") != std::string::npos) {
    std::string compact;
    for (char c : s)
      if (!detail::is_space(c)) compact.push_back(c);
    s = compact;
  }

  auto digits = detail::strip_grouping(s);
  if (!digits || !detail::well_formed_unsigned(*digits)) throw ParseError(original);

  std::string body = *digits;
  if (unit_power != 0) {
    const auto e = body.find_first_of("eE");
    if (e == std::string::npos) {
      body += "e" + std::to_string(unit_power);
    } else {
      const int exp = std::stoi(body.substr(e + 1));
      body = body.substr(0, e) + "e" + std::to_string(exp + unit_power);
    }
  }
  double v = 0.0;
  try {
    v = parse_double_exact(body);
  } catch (const ParseError&) {
    throw ParseError(original);
  }
  if (!std::isfinite(v)) throw ParseError(original);
  return negative ? -v : v;
}

}  // namespace fc2t
