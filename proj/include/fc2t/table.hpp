#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "decimal.hpp"
#include "errors.hpp"

namespace fc2t {

using json = nlohmann::json;

// A cell of a predicted table may be absent (unparseable or missing in the model
// output); ground-truth cells are always present.
using Cell = std::optional<double>;

// Rows are x-axis categories, columns are entities (one legend entry each).
struct DataTable {
  std::string id;
  std::vector<std::string> row_headers;
  std::vector<std::string> col_headers;
  std::vector<std::vector<Cell>> cells;  // row-major, |row_headers| x |col_headers|

  std::size_t rows() const { return row_headers.size(); }
  std::size_t cols() const { return col_headers.size(); }
  std::size_t size() const { return rows() * cols(); }

  // Ground-truth access; throws when the cell is absent.
  double value(std::size_t r, std::size_t c) const {
    const Cell& cell = cells.at(r).at(c);
    if (!cell) throw DomainError("DataTable::value: absent cell in table '" + id + "'");
    return *cell;
  }

  double max_value() const {
    double m = -INFINITY;
    for (const auto& row : cells)
      for (const auto& c : row)
        if (c) m = std::max(m, *c);
    return m;
  }

  bool operator==(const DataTable&) const = default;
};

enum class ChartType { Line, Dot, Bar };
enum class Part { A, B, C, D };
enum class Condition { Base, Ticks3, Ticks11, Pos, Neg, Ext, Comma, Sci, Abbr };
enum class FormatKind { Plain, Comma, Scientific, Abbrev };

inline constexpr std::array kChartTypes{ChartType::Line, ChartType::Dot, ChartType::Bar};
inline constexpr std::array kConditions{Condition::Base, Condition::Ticks3, Condition::Ticks11,
                                        Condition::Pos,  Condition::Neg,    Condition::Ext,
                                        Condition::Comma, Condition::Sci,   Condition::Abbr};
inline constexpr std::array kFormatKinds{FormatKind::Plain, FormatKind::Comma,
                                         FormatKind::Scientific, FormatKind::Abbrev};

inline std::string_view to_string(ChartType c) {
  switch (c) {
    case ChartType::Line: return "line";
    case ChartType::Dot: return "dot";
    case ChartType::Bar: return "bar";
  }
  return "?";
}

inline std::string_view to_string(Part p) {
  switch (p) {
    case Part::A: return "A";
    case Part::B: return "B";
    case Part::C: return "C";
    case Part::D: return "D";
  }
  return "?";
}

inline std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Base: return "base";
    case Condition::Ticks3: return "ticks3";
    case Condition::Ticks11: return "ticks11";
    case Condition::Pos: return "pos";
    case Condition::Neg: return "neg";
    case Condition::Ext: return "ext";
    case Condition::Comma: return "comma";
    case Condition::Sci: return "sci";
    case Condition::Abbr: return "abbr";
  }
  return "?";
}

inline std::string_view to_string(FormatKind f) {
  switch (f) {
    case FormatKind::Plain: return "plain";
    case FormatKind::Comma: return "comma";
    case FormatKind::Scientific: return "scientific";
    case FormatKind::Abbrev: return "abbrev";
  }
  return "?";
}

namespace detail {
inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

template <typename Enum, std::size_t N>
Enum enum_from_string(std::string_view s, const std::array<Enum, N>& all, const char* what) {
  const std::string key = lower(s);
  for (Enum e : all)
    if (lower(to_string(e)) == key) return e;
  throw ConfigError(std::string("unknown ") + what + ": '" + std::string(s) + "'");
}
}  // namespace detail

inline ChartType chart_type_from_string(std::string_view s) {
  return detail::enum_from_string(s, kChartTypes, "chart type");
}
inline Part part_from_string(std::string_view s) {
  return detail::enum_from_string(s, std::array{Part::A, Part::B, Part::C, Part::D}, "part");
}
inline Condition condition_from_string(std::string_view s) {
  return detail::enum_from_string(s, kConditions, "condition");
}
inline FormatKind format_from_string(std::string_view s) {
  return detail::enum_from_string(s, kFormatKinds, "format");
}

inline Part part_of(Condition c) {
  switch (c) {
    case Condition::Base: return Part::A;
    case Condition::Ticks3:
    case Condition::Ticks11: return Part::B;
    case Condition::Pos:
    case Condition::Neg:
    case Condition::Ext: return Part::C;
    case Condition::Comma:
    case Condition::Sci:
    case Condition::Abbr: return Part::D;
  }
  return Part::A;
}

struct AxisSpec {
  std::vector<double> tick_values;  // ascending, equally spaced
  double major_interval = 0.0;
  double minor_estimate_t = 0.0;  // major_interval / 5
  FormatKind format = FormatKind::Plain;

  int n_major_ticks() const { return static_cast<int>(tick_values.size()); }
  double min_tick() const { return tick_values.front(); }
  double max_tick() const { return tick_values.back(); }

  bool operator==(const AxisSpec&) const = default;
};

// Empty result means the axis satisfies its invariants.
inline std::vector<std::string> validate_axis(const AxisSpec& axis) {
  std::vector<std::string> out;
  const int n = axis.n_major_ticks();
  if (n != 3 && n != 6 && n != 11) out.push_back("tick count " + std::to_string(n) + " not in {3,6,11}");
  if (!(axis.major_interval > 0)) out.push_back("major interval must be positive");
  if (axis.minor_estimate_t != axis.major_interval / 5)
    out.push_back("minor estimate is not one fifth of the major interval");
  for (int i = 0; i + 1 < n; ++i) {
    const double step = axis.tick_values[i + 1] - axis.tick_values[i];
    if (std::abs(step - axis.major_interval) > 1e-9 * std::abs(axis.major_interval)) {
      out.push_back("ticks not equally spaced at index " + std::to_string(i));
      break;
    }
  }
  return out;
}

struct BenchmarkItem {
  std::string id;
  std::string table_id;         // ground-truth table rendered by this item
  std::string source_table_id;  // Part-A table the item derives from (pairing key)
  ChartType chart_type = ChartType::Line;
  Part part = Part::A;
  int digit_length = 0;
  int entity_count = 0;
  Condition condition = Condition::Base;
  AxisSpec axis;
  std::string image_ref;

  bool operator==(const BenchmarkItem&) const = default;
};

// Number of digits in the integer part of |x|: d such that 10^(d-1) <= |x| < 10^d,
// and 0 for |x| < 1.
inline int digit_length(double x) {
  if (!std::isfinite(x)) throw DomainError("digit_length: non-finite input");
  const double a = std::abs(x);
  if (a < 1.0) return 0;
  auto pow10 = [](int k) { return parse_double_exact("1e" + std::to_string(k)); };
  int d = static_cast<int>(std::floor(std::log10(a))) + 1;
  while (a >= pow10(d)) ++d;
  while (d > 1 && a < pow10(d - 1)) --d;
  return d;
}

enum class ViolationKind { RaggedGrid, DuplicateHeader, NonFiniteCell, AbsentCell, EntityCount };

struct Violation {
  ViolationKind kind;
  std::string message;
};

enum class TableRole { GroundTruth, Prediction };

inline std::vector<Violation> validate_table(const DataTable& t,
                                             TableRole role = TableRole::GroundTruth) {
  std::vector<Violation> out;
  if (t.cells.size() != t.rows()) {
    out.push_back({ViolationKind::RaggedGrid, "row count " + std::to_string(t.cells.size()) +
                                                  " != " + std::to_string(t.rows()) + " row headers"});
  }
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    if (t.cells[r].size() != t.cols()) {
      out.push_back({ViolationKind::RaggedGrid, "row " + std::to_string(r) + " has " +
                                                    std::to_string(t.cells[r].size()) + " cells, expected " +
                                                    std::to_string(t.cols())});
    }
  }
  auto check_dupes = [&](const std::vector<std::string>& headers, const char* what) {
    std::set<std::string> seen;
    for (const auto& h : headers)
      if (!seen.insert(h).second)
        out.push_back({ViolationKind::DuplicateHeader, std::string("duplicate ") + what + " header '" + h + "'"});
  };
  check_dupes(t.row_headers, "row");
  check_dupes(t.col_headers, "column");
  std::size_t non_finite = 0, absent = 0;
  for (const auto& row : t.cells)
    for (const auto& c : row) {
      if (!c)
        ++absent;
      else if (!std::isfinite(*c))
        ++non_finite;
    }
  if (non_finite > 0)
    out.push_back({ViolationKind::NonFiniteCell, std::to_string(non_finite) + " non-finite cell(s)"});
  if (role == TableRole::GroundTruth) {
    if (absent > 0) out.push_back({ViolationKind::AbsentCell, std::to_string(absent) + " absent cell(s)"});
    if (t.cols() < 1 || t.cols() > 6)
      out.push_back({ViolationKind::EntityCount, "entity count " + std::to_string(t.cols()) + " outside 1..6"});
  }
  return out;
}

// ---- JSON ----------------------------------------------------------------------

inline void to_json(json& j, const DataTable& t) {
  json cells = json::array();
  for (const auto& row : t.cells) {
    json jr = json::array();
    for (const auto& c : row) jr.push_back(c ? json(*c) : json(nullptr));
    cells.push_back(std::move(jr));
  }
  j = json{{"id", t.id}, {"row_headers", t.row_headers}, {"col_headers", t.col_headers}, {"cells", cells}};
}

inline void from_json(const json& j, DataTable& t) {
  t.id = j.value("id", std::string{});
  t.row_headers = j.at("row_headers").get<std::vector<std::string>>();
  t.col_headers = j.at("col_headers").get<std::vector<std::string>>();
  t.cells.clear();
  for (const auto& jr : j.at("cells")) {
    std::vector<Cell> row;
    for (const auto& c : jr) row.push_back(c.is_null() ? Cell{} : Cell{c.get<double>()});
    t.cells.push_back(std::move(row));
  }
}

inline void to_json(json& j, const AxisSpec& a) {
  j = json{{"tick_values", a.tick_values},
           {"major_interval", a.major_interval},
           {"minor_estimate_t", a.minor_estimate_t},
           {"format", std::string(to_string(a.format))},
           {"n_major_ticks", a.n_major_ticks()}};
}

inline void from_json(const json& j, AxisSpec& a) {
  a.tick_values = j.at("tick_values").get<std::vector<double>>();
  a.major_interval = j.at("major_interval").get<double>();
  a.minor_estimate_t = j.at("minor_estimate_t").get<double>();
  a.format = format_from_string(j.at("format").get<std::string>());
}

inline void to_json(json& j, const BenchmarkItem& it) {
  j = json{{"id", it.id},
           {"table_id", it.table_id},
           {"source_table_id", it.source_table_id},
           {"chart_type", std::string(to_string(it.chart_type))},
           {"part", std::string(to_string(it.part))},
           {"digit_length", it.digit_length},
           {"entity_count", it.entity_count},
           {"condition", std::string(to_string(it.condition))},
           {"axis", it.axis},
           {"image_ref", it.image_ref}};
}

inline void from_json(const json& j, BenchmarkItem& it) {
  it.id = j.at("id").get<std::string>();
  it.table_id = j.at("table_id").get<std::string>();
  it.source_table_id = j.value("source_table_id", it.table_id);
  it.chart_type = chart_type_from_string(j.at("chart_type").get<std::string>());
  it.part = part_from_string(j.at("part").get<std::string>());
  it.digit_length = j.at("digit_length").get<int>();
  it.entity_count = j.at("entity_count").get<int>();
  it.condition = condition_from_string(j.at("condition").get<std::string>());
  it.axis = j.at("axis").get<AxisSpec>();
  it.image_ref = j.value("image_ref", std::string{});
}

}  // namespace fc2t
