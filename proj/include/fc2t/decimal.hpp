#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <system_error>

#include "errors.hpp"

namespace fc2t {

// Shortest decimal text that round-trips to v ("7.3", "1e+17").
inline std::string shortest_repr(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Shortest round-trip text forced into fixed notation ("100000000000000000", "0.025").
inline std::string fixed_repr(double v) {
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

// Correctly rounded conversion of decimal text; the whole string must be consumed.
inline double parse_double_exact(const std::string& s) {
  double out = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(s);
  return out;
}

// Exact base-10 value mantissa * 10^exponent.  Generated tables and tick values are
// built in this representation and converted to double once, so that 7.3 scaled by
// 10^3 is exactly the double nearest 7300 rather than 7.3 * 1000.0.
struct Decimal {
  std::int64_t mantissa = 0;
  int exponent = 0;

  static Decimal from_double(double v) {
    if (!std::isfinite(v)) throw DomainError("Decimal::from_double: non-finite value");
    std::string s = shortest_repr(v);
    Decimal d;
    bool neg = false;
    std::size_t i = 0;
    if (s[i] == '-') {
      neg = true;
      ++i;
    }
    std::int64_t m = 0;
    int exp = 0;
    bool after_point = false;
    for (; i < s.size() && s[i] != 'e'; ++i) {
      if (s[i] == '.') {
        after_point = true;
        continue;
      }
      m = m * 10 + (s[i] - '0');
      if (after_point) --exp;
    }
    if (i < s.size()) exp += std::atoi(s.c_str() + i + 1);
    d.mantissa = neg ? -m : m;
    d.exponent = exp;
    return d.normalized();
  }

  Decimal normalized() const {
    Decimal d = *this;
    if (d.mantissa == 0) return Decimal{0, 0};
    while (d.mantissa % 10 == 0) {
      d.mantissa /= 10;
      ++d.exponent;
    }
    return d;
  }

  double to_double() const {
    return parse_double_exact(std::to_string(mantissa) + "e" + std::to_string(exponent));
  }

  Decimal shifted(int powers_of_ten) const { return Decimal{mantissa, exponent + powers_of_ten}; }

  Decimal times(std::int64_t k) const { return Decimal{mantissa * k, exponent}.normalized(); }

  Decimal divided_by(std::int64_t k) const {
    Decimal d = *this;
    for (int guard = 0; d.mantissa % k != 0; ++guard) {
      if (guard > 12) throw DomainError("Decimal::divided_by: inexact division");
      d.mantissa *= 10;
      --d.exponent;
    }
    d.mantissa /= k;
    return d.normalized();
  }

  friend Decimal operator+(Decimal a, Decimal b) {
    if (a.mantissa == 0) return b;
    if (b.mantissa == 0) return a;
    while (a.exponent > b.exponent) {
      a.mantissa *= 10;
      --a.exponent;
    }
    while (b.exponent > a.exponent) {
      b.mantissa *= 10;
      --b.exponent;
    }
    return Decimal{a.mantissa + b.mantissa, a.exponent}.normalized();
  }

  friend Decimal operator-(Decimal a, Decimal b) { return a + Decimal{-b.mantissa, b.exponent}; }
};

}  // namespace fc2t
