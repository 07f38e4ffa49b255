#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "decimal.hpp"
#include "errors.hpp"
#include "table.hpp"

namespace fc2t {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

struct GenConfig {
  std::uint64_t seed = 20240917;
  int tables_per_entity_count = 10;
  std::vector<int> entity_counts{1, 2, 3, 4, 5, 6};
  std::vector<int> digit_lengths{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  int x_category_count = 4;
  std::vector<std::string> x_category_labels{"2018", "2019", "2020", "2021"};
  std::vector<std::string> entity_labels{"Series A", "Series B", "Series C",
                                         "Series D", "Series E", "Series F"};
  std::set<Part> parts{Part::A, Part::B, Part::C, Part::D};
  // Parts B-D are built from the Part-A tables with this many entities.
  int derived_parts_entity_count = 3;

  bool operator==(const GenConfig&) const = default;
};

struct Manifest {
  std::vector<BenchmarkItem> items;
  std::map<std::string, DataTable> ground_truth;
  GenConfig config;
  std::string toolkit_version = kToolkitVersion;
  json style;  // render style recorded by render_manifest, null until rendered

  const DataTable& table_for(const BenchmarkItem& item) const {
    auto it = ground_truth.find(item.table_id);
    if (it == ground_truth.end()) throw ConfigError("no ground truth for table '" + item.table_id + "'");
    return it->second;
  }

  const BenchmarkItem* find_item(const std::string& id) const {
    for (const auto& it : items)
      if (it.id == id) return &it;
    return nullptr;
  }
};

namespace detail {

inline std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

inline void check_config(const GenConfig& c) {
  if (c.tables_per_entity_count < 1) throw ConfigError("tables_per_entity_count must be >= 1");
  if (c.entity_counts.empty()) throw ConfigError("entity_counts is empty");
  if (c.digit_lengths.empty()) throw ConfigError("digit_lengths is empty");
  for (int e : c.entity_counts)
    if (e < 1 || e > 6) throw ConfigError("entity count " + std::to_string(e) + " outside 1..6");
  for (int d : c.digit_lengths)
    if (d < 0 || d > 16) throw ConfigError("digit length " + std::to_string(d) + " outside 0..16");
  if (c.x_category_count < 2) throw ConfigError("x_category_count must be >= 2");
  if (static_cast<int>(c.x_category_labels.size()) != c.x_category_count)
    throw ConfigError("x_category_labels must have x_category_count entries");
  if (c.entity_labels.size() < 6) throw ConfigError("entity_labels needs 6 entries");
  if (std::set<int>(c.entity_counts.begin(), c.entity_counts.end()).size() != c.entity_counts.size())
    throw ConfigError("duplicate entity counts");
  if (std::set<int>(c.digit_lengths.begin(), c.digit_lengths.end()).size() != c.digit_lengths.size())
    throw ConfigError("duplicate digit lengths");
}

}  // namespace detail

// Tables with single-digit-length cells: values are drawn uniformly from
// {1.00, 1.01, ..., 9.99}, one independent draw per cell.
inline std::vector<DataTable> generate_base_tables(const GenConfig& config) {
  detail::check_config(config);
  std::mt19937_64 rng(config.seed);
  std::vector<DataTable> out;
  for (int entities : config.entity_counts) {
    for (int k = 0; k < config.tables_per_entity_count; ++k) {
      DataTable t;
      t.id = "e" + std::to_string(entities) + "_t" + detail::two_digits(k);
      t.row_headers = config.x_category_labels;
      t.col_headers.assign(config.entity_labels.begin(), config.entity_labels.begin() + entities);
      for (int r = 0; r < config.x_category_count; ++r) {
        std::vector<Cell> row;
        for (int c = 0; c < entities; ++c) {
          const auto cents = static_cast<std::int64_t>(100 + rng() % 900);
          row.emplace_back(Decimal{cents, -2}.to_double());
        }
        t.cells.push_back(std::move(row));
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline DataTable scale_table(const DataTable& t, int target_dl) {
  if (target_dl < 0 || target_dl > 16) throw DomainError("scale_table: target digit length outside 0..16");
  DataTable out = t;
  out.id = t.id + "_dl" + detail::two_digits(target_dl);
  for (auto& row : out.cells) {
    for (auto& c : row) {
      if (!c || digit_length(*c) != 1)
        throw DomainError("scale_table: table '" + t.id + "' has a cell without digit length 1");
      c = Decimal::from_double(*c).shifted(target_dl - 1).to_double();
    }
  }
  return out;
}

namespace detail {

// Smallest m * 10^k >= max_value with m in {1, 2, 2.5, 5}; mantissa is stored
// as m * 10 so every candidate is an exact Decimal.
inline Decimal nice_maximum(double max_value) {
  const int k0 = static_cast<int>(std::floor(std::log10(max_value)));
  static constexpr std::int64_t kMantissas[] = {10, 20, 25, 50};
  for (int k = k0 - 1; k <= k0 + 1; ++k) {  // ascending exponent: smaller exponent wins ties
    for (std::int64_t m : kMantissas) {
      Decimal cand = Decimal{m, k - 1}.normalized();
      if (cand.to_double() >= max_value) return cand;
    }
  }
  return Decimal{1, k0 + 2};
}

inline AxisSpec axis_over(Decimal min_tick, Decimal max_tick, int n_ticks, FormatKind format) {
  AxisSpec a;
  a.format = format;
  const Decimal interval = (max_tick - min_tick).divided_by(n_ticks - 1);
  for (int i = 0; i < n_ticks; ++i) a.tick_values.push_back((min_tick + interval.times(i)).to_double());
  a.major_interval = interval.to_double();
  a.minor_estimate_t = a.major_interval / 5;
  return a;
}

}  // namespace detail

// Axis from 0 to the nice maximum above the largest cell, n_major_ticks equally spaced.
inline AxisSpec derive_axis(const DataTable& t, int n_major_ticks) {
  if (n_major_ticks != 3 && n_major_ticks != 6 && n_major_ticks != 11)
    throw DomainError("derive_axis: tick count must be 3, 6 or 11");
  if (t.size() == 0) throw DomainError("derive_axis: empty table");
  const double max_value = t.max_value();
  if (!(max_value > 0)) throw DomainError("derive_axis: degenerate axis (no positive cell)");
  return detail::axis_over(Decimal{0, 0}, detail::nice_maximum(max_value), n_major_ticks, FormatKind::Plain);
}

enum class RangeVariant { Pos, Neg, Ext };

inline std::pair<DataTable, AxisSpec> shift_range(const DataTable& t, const AxisSpec& axis, RangeVariant variant) {
  if (axis.n_major_ticks() != 6) throw DomainError("shift_range: base axis must have 6 major ticks");
  if (axis.min_tick() != 0.0 || !(axis == derive_axis(t, 6)) || axis.format != FormatKind::Plain)
    throw DomainError("shift_range: table '" + t.id + "' is not an unshifted base table");
  const Decimal interval = Decimal::from_double(axis.major_interval);
  const Decimal max_tick = Decimal::from_double(axis.max_tick());

  if (variant == RangeVariant::Ext) {
    return {t, detail::axis_over(Decimal{0, 0}, max_tick.times(2), 6, axis.format)};
  }
  const Decimal delta = variant == RangeVariant::Pos ? interval.times(3) : interval.times(-3);
  DataTable out = t;
  out.id = t.id + (variant == RangeVariant::Pos ? "_pos" : "_neg");
  for (auto& row : out.cells)
    for (auto& c : row) c = (Decimal::from_double(*c) + delta).to_double();
  return {std::move(out), detail::axis_over(delta, max_tick + delta, 6, axis.format)};
}

// Structural invariants of an item against its ground-truth table.
inline std::vector<std::string> validate_item(const BenchmarkItem& item, const DataTable& table) {
  std::vector<std::string> out;
  if ((item.part == Part::A) != (item.condition == Condition::Base)) out.push_back("part A <=> base condition violated");
  if (part_of(item.condition) != item.part) out.push_back("condition does not belong to part");
  if (item.part != Part::A && item.entity_count != 3) out.push_back("parts B-D require three entities");
  if (static_cast<int>(table.cols()) != item.entity_count) out.push_back("entity count mismatch");
  for (auto& v : validate_axis(item.axis)) out.push_back("axis: " + v);
  if (!item.axis.tick_values.empty()) {
    const double lo = item.axis.min_tick(), hi = item.axis.max_tick();
    const double tol = 1e-9 * std::max(std::abs(lo), std::abs(hi));
    for (const auto& row : table.cells)
      for (const auto& c : row)
        if (!c || *c < lo - tol || *c > hi + tol) {
          out.push_back("cell outside tick range");
          return out;
        }
  }
  return out;
}

inline Manifest generate_manifest(const GenConfig& config) {
  detail::check_config(config);
  const bool derived_parts =
      config.parts.count(Part::B) || config.parts.count(Part::C) || config.parts.count(Part::D);
  if (derived_parts &&
      std::find(config.entity_counts.begin(), config.entity_counts.end(), config.derived_parts_entity_count) ==
          config.entity_counts.end())
    throw ConfigError("parts B-D need tables with " + std::to_string(config.derived_parts_entity_count) +
                      " entities");

  Manifest m;
  m.config = config;
  const auto base = generate_base_tables(config);

  auto add_items = [&](const DataTable& table, const std::string& source_id, Part part, Condition cond, int dl,
                       const AxisSpec& axis) {
    for (ChartType ct : kChartTypes) {
      BenchmarkItem it;
      it.id = std::string(to_string(part)) + "_" + source_id + "_" + std::string(to_string(cond)) + "_" +
              std::string(to_string(ct));
      it.table_id = table.id;
      it.source_table_id = source_id;
      it.chart_type = ct;
      it.part = part;
      it.digit_length = dl;
      it.entity_count = static_cast<int>(table.cols());
      it.condition = cond;
      it.axis = axis;
      m.items.push_back(std::move(it));
    }
  };

  for (int dl : config.digit_lengths) {
    for (const auto& b : base) {
      DataTable scaled = scale_table(b, dl);
      const AxisSpec axis = derive_axis(scaled, 6);
      const bool keep_for_a = config.parts.count(Part::A) > 0;
      const bool derive = static_cast<int>(scaled.cols()) == config.derived_parts_entity_count;
      if (keep_for_a) add_items(scaled, scaled.id, Part::A, Condition::Base, dl, axis);
      if (derive) {
        if (config.parts.count(Part::B)) {
          add_items(scaled, scaled.id, Part::B, Condition::Ticks3, dl, derive_axis(scaled, 3));
          add_items(scaled, scaled.id, Part::B, Condition::Ticks11, dl, derive_axis(scaled, 11));
        }
        if (config.parts.count(Part::C)) {
          const std::pair<RangeVariant, Condition> variants[] = {
              {RangeVariant::Pos, Condition::Pos}, {RangeVariant::Neg, Condition::Neg}, {RangeVariant::Ext, Condition::Ext}};
          for (auto [variant, cond] : variants) {
            auto [shifted, shifted_axis] = shift_range(scaled, axis, variant);
            add_items(shifted, scaled.id, Part::C, cond, dl, shifted_axis);
            if (shifted.id != scaled.id) m.ground_truth.emplace(shifted.id, std::move(shifted));
          }
        }
        if (config.parts.count(Part::D)) {
          const std::pair<FormatKind, Condition> formats[] = {
              {FormatKind::Comma, Condition::Comma}, {FormatKind::Scientific, Condition::Sci}, {FormatKind::Abbrev, Condition::Abbr}};
          for (auto [fmt, cond] : formats) {
            AxisSpec formatted = axis;
            formatted.format = fmt;
            add_items(scaled, scaled.id, Part::D, cond, dl, formatted);
          }
        }
      }
      if (keep_for_a || derive) m.ground_truth.emplace(scaled.id, std::move(scaled));
    }
  }
  // Drop tables no item references (e.g. non-derived tables when Part A is excluded).
  std::set<std::string> used;
  for (const auto& it : m.items) used.insert(it.table_id);
  std::erase_if(m.ground_truth, [&](const auto& kv) { return !used.count(kv.first); });
  return m;
}

// Number of distinct scaled Part-A tables (the 1,020 under defaults) behind a manifest.
inline std::size_t count_source_tables(const Manifest& m) {
  std::set<std::string> ids;
  for (const auto& it : m.items) ids.insert(it.source_table_id);
  return ids.size();
}

// ---- filtering --------------------------------------------------------------------

struct ItemFilter {
  std::set<Part> parts;
  std::set<ChartType> chart_types;
  std::set<Condition> conditions;
  std::set<int> digit_lengths;
  std::set<int> entity_counts;

  bool matches(const BenchmarkItem& it) const {
    return (parts.empty() || parts.count(it.part)) && (chart_types.empty() || chart_types.count(it.chart_type)) &&
           (conditions.empty() || conditions.count(it.condition)) &&
           (digit_lengths.empty() || digit_lengths.count(it.digit_length)) &&
           (entity_counts.empty() || entity_counts.count(it.entity_count));
  }

  // "part=A,digit_length=0..2" ; a token without '=' continues the previous key
  // ("part=A,B").
  static ItemFilter parse(const std::string& spec) {
    ItemFilter f;
    std::string key;
    auto add_ints = [](std::set<int>& dst, const std::string& v) {
      const auto dots = v.find("..");
      try {
        if (dots == std::string::npos) {
          dst.insert(std::stoi(v));
        } else {
          const int lo = std::stoi(v.substr(0, dots)), hi = std::stoi(v.substr(dots + 2));
          if (lo > hi) throw ConfigError("empty range '" + v + "'");
          for (int i = lo; i <= hi; ++i) dst.insert(i);
        }
      } catch (const std::logic_error&) {
        throw ConfigError("bad integer filter value '" + v + "'");
      }
    };
    std::size_t start = 0;
    while (start <= spec.size() && !spec.empty()) {
      std::size_t end = spec.find(',', start);
      if (end == std::string::npos) end = spec.size();
      std::string token = spec.substr(start, end - start);
      std::string value = token;
      if (const auto eq = token.find('='); eq != std::string::npos) {
        key = token.substr(0, eq);
        value = token.substr(eq + 1);
      } else if (key.empty()) {
        throw ConfigError("filter token '" + token + "' has no key");
      }
      if (key == "part")
        f.parts.insert(part_from_string(value));
      else if (key == "chart_type" || key == "chart")
        f.chart_types.insert(chart_type_from_string(value));
      else if (key == "condition")
        f.conditions.insert(condition_from_string(value));
      else if (key == "digit_length" || key == "dl")
        add_ints(f.digit_lengths, value);
      else if (key == "entity_count" || key == "entities")
        add_ints(f.entity_counts, value);
      else
        throw ConfigError("unknown filter key '" + key + "'");
      start = end + 1;
    }
    return f;
  }
};

inline Manifest filter_manifest(const Manifest& m, const ItemFilter& f) {
  Manifest out;
  out.config = m.config;
  out.toolkit_version = m.toolkit_version;
  out.style = m.style;
  for (const auto& it : m.items)
    if (f.matches(it)) {
      out.items.push_back(it);
      out.ground_truth.emplace(it.table_id, m.table_for(it));
    }
  return out;
}

// ---- manifest file ------------------------------------------------------------------

inline void to_json(json& j, const GenConfig& c) {
  std::vector<std::string> parts;
  for (Part p : c.parts) parts.emplace_back(to_string(p));
  j = json{{"seed", c.seed},
           {"tables_per_entity_count", c.tables_per_entity_count},
           {"entity_counts", c.entity_counts},
           {"digit_lengths", c.digit_lengths},
           {"x_category_count", c.x_category_count},
           {"x_category_labels", c.x_category_labels},
           {"entity_labels", c.entity_labels},
           {"parts", parts},
           {"derived_parts_entity_count", c.derived_parts_entity_count}};
}

inline void from_json(const json& j, GenConfig& c) {
  c = GenConfig{};
  c.seed = j.value("seed", c.seed);
  c.tables_per_entity_count = j.value("tables_per_entity_count", c.tables_per_entity_count);
  c.entity_counts = j.value("entity_counts", c.entity_counts);
  c.digit_lengths = j.value("digit_lengths", c.digit_lengths);
  c.x_category_count = j.value("x_category_count", c.x_category_count);
  c.x_category_labels = j.value("x_category_labels", c.x_category_labels);
  c.entity_labels = j.value("entity_labels", c.entity_labels);
  c.derived_parts_entity_count = j.value("derived_parts_entity_count", c.derived_parts_entity_count);
  if (j.contains("parts")) {
    c.parts.clear();
    for (const auto& p : j.at("parts")) c.parts.insert(part_from_string(p.get<std::string>()));
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// With shard_tables, each ground-truth table goes to tables/<id>.json next to the
// manifest and the manifest stores the relative path instead of the table.
inline void save_manifest(const Manifest& m, const std::filesystem::path& path, bool shard_tables = false) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["toolkit_version"] = m.toolkit_version;
  j["config"] = m.config;
  j["style"] = m.style;
  j["items"] = m.items;
  json gt = json::object();
  for (const auto& [id, table] : m.ground_truth) {
    if (shard_tables) {
      const std::string rel = "tables/" + id + ".json";
      write_text_file(path.parent_path() / rel, json(table).dump());
      gt[id] = rel;
    } else {
      gt[id] = table;
    }
  }
  j["ground_truth"] = std::move(gt);
  write_text_file(path, j.dump(1));
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw ConfigError("manifest '" + path.string() + "' has unsupported schema_version");
  Manifest m;
  m.toolkit_version = j.value("toolkit_version", std::string{});
  m.config = j.at("config").get<GenConfig>();
  m.style = j.value("style", json());
  m.items = j.at("items").get<std::vector<BenchmarkItem>>();
  for (const auto& [id, v] : j.at("ground_truth").items()) {
    if (v.is_string())
      m.ground_truth.emplace(id, json::parse(read_text_file(path.parent_path() / v.get<std::string>())).get<DataTable>());
    else
      m.ground_truth.emplace(id, v.get<DataTable>());
  }
  return m;
}

}  // namespace fc2t
