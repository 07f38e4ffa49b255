#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "benchmark.hpp"
#include "errors.hpp"
#include "render.hpp"
#include "scoring.hpp"
#include "table.hpp"

namespace fc2t {

// ---- descriptive statistics ------------------------------------------------------

// Population standard deviation over mean.
inline double coefficient_of_variation(std::span<const double> counts) {
  if (counts.empty()) throw DomainError("coefficient_of_variation: no buckets");
  const double n = static_cast<double>(counts.size());
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
  if (!(mean > 0)) throw DomainError("coefficient_of_variation: mean must be positive");
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  return std::sqrt(ss / n) / mean;
}

inline double coefficient_of_variation(const std::vector<std::size_t>& counts) {
  std::vector<double> d(counts.begin(), counts.end());
  return coefficient_of_variation(std::span<const double>(d));
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: need two equal-length samples of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw DomainError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---- Wilcoxon signed-rank --------------------------------------------------------

enum class Direction { BaseBetter, ComparedBetter, NoDifference };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::BaseBetter: return "base_better";
    case Direction::ComparedBetter: return "compared_better";
    case Direction::NoDifference: return "no_difference";
  }
  return "?";
}

struct TestResult {
  double statistic = 0;  // min(W+, W-)
  double w_plus = 0;
  double p_value = 1;
  std::size_t n_pairs = 0;    // pairs tested
  std::size_t n_nonzero = 0;  // pairs with a nonzero difference
  std::size_t excluded = 0;   // unpaired observations dropped before testing
  double mean_difference = 0; // mean(x - y)
  bool exact = true;
  Direction direction = Direction::NoDifference;
};

enum class WilcoxonMode { Auto, Exact, Normal };

inline constexpr double kAlpha = 0.05;
inline constexpr std::size_t kExactLimit = 25;

namespace detail {

// Average ranks of |d| (1-based), ties sharing the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& abs_d) {
  std::vector<std::size_t> order(abs_d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return abs_d[a] < abs_d[b]; });
  std::vector<double> ranks(abs_d.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

// Paired two-sided test of x against y.  Zero differences are dropped, tied
// ranks averaged.  Exact null distribution (ties included, via doubled ranks) up
// to 25 nonzero pairs, normal approximation with tie and continuity correction
// above.  Direction is BaseBetter when x tends to exceed y.
inline TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                       WilcoxonMode mode = WilcoxonMode::Auto, double alpha = kAlpha) {
  if (x.size() != y.size()) throw DomainError("wilcoxon_signed_rank: samples differ in length");
  TestResult res;
  res.n_pairs = x.size();
  std::vector<double> diffs;
  double sum_diff = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum_diff += d;
    if (d != 0.0) diffs.push_back(d);
  }
  res.mean_difference = x.empty() ? 0.0 : sum_diff / static_cast<double>(x.size());
  res.n_nonzero = diffs.size();
  if (diffs.empty()) return res;  // p = 1, no difference

  std::vector<double> abs_d(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::abs(diffs[i]);
  const auto ranks = detail::average_ranks(abs_d);
  const std::size_t n = diffs.size();
  double w_plus = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) w_plus += ranks[i];
  const double total = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  const double w_minus = total - w_plus;
  res.w_plus = w_plus;
  res.statistic = std::min(w_plus, w_minus);

  const bool exact = mode == WilcoxonMode::Exact || (mode == WilcoxonMode::Auto && n <= kExactLimit);
  res.exact = exact;
  if (exact) {
    // Doubled ranks are integers; count subsets per doubled rank sum.
    std::vector<int> r2(n);
    int max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<int>(std::lround(ranks[i] * 2));
      max_sum += r2[i];
    }
    std::vector<double> ways(static_cast<std::size_t>(max_sum) + 1, 0.0);
    ways[0] = 1.0;
    int reach = 0;
    for (int r : r2) {
      for (int s = reach; s >= 0; --s)
        if (ways[static_cast<std::size_t>(s)] != 0.0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
      reach += r;
    }
    const int w2 = static_cast<int>(std::lround(w_plus * 2));
    double lower = 0, upper = 0;
    for (int s = 0; s <= max_sum; ++s) {
      if (s <= w2) lower += ways[static_cast<std::size_t>(s)];
      if (s >= w2) upper += ways[static_cast<std::size_t>(s)];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
  } else {
    const double nn = static_cast<double>(n);
    double tie_term = 0;
    {
      std::vector<double> sorted = abs_d;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
      }
    }
    const double mean = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double num = std::max(0.0, std::abs(w_plus - mean) - 0.5);
    res.p_value = var > 0 ? std::min(1.0, 2.0 * detail::normal_sf(num / std::sqrt(var))) : 1.0;
  }
  if (res.p_value < alpha) res.direction = w_plus > w_minus ? Direction::BaseBetter : Direction::ComparedBetter;
  return res;
}

// ---- crossings -------------------------------------------------------------------

struct CrossingCount {
  std::size_t total = 0;
  double avg_per_entity = 0;       // total / entities
  double avg_involvement = 0;      // crossings touching an entity, averaged: 2 * total / entities
};

// Entities are polylines over the x-category index.  Two entities cross on a
// segment when their difference changes sign strictly inside it; a shared value
// at an x position counts once per pair per position.
inline CrossingCount count_crossings(const DataTable& t) {
  if (t.cols() < 2 || t.rows() < 2) throw DomainError("count_crossings: need >= 2 entities and >= 2 categories");
  CrossingCount out;
  for (std::size_t a = 0; a < t.cols(); ++a)
    for (std::size_t b = a + 1; b < t.cols(); ++b) {
      for (std::size_t r = 0; r < t.rows(); ++r) {
        const double d0 = t.value(r, a) - t.value(r, b);
        if (d0 == 0.0) ++out.total;
        if (r + 1 < t.rows()) {
          const double d1 = t.value(r + 1, a) - t.value(r + 1, b);
          if ((d0 < 0 && d1 > 0) || (d0 > 0 && d1 < 0)) ++out.total;
        }
      }
    }
  const double n = static_cast<double>(t.cols());
  out.avg_per_entity = static_cast<double>(out.total) / n;
  out.avg_involvement = 2.0 * static_cast<double>(out.total) / n;
  return out;
}

// ---- grouping --------------------------------------------------------------------

enum class Dimension { DigitLength, EntityCount, MajorTicks, RangeVariant, Format, ChartType };

inline constexpr std::array kDimensions{Dimension::DigitLength,  Dimension::EntityCount, Dimension::MajorTicks,
                                        Dimension::RangeVariant, Dimension::Format,      Dimension::ChartType};

inline std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::DigitLength: return "digit_length";
    case Dimension::EntityCount: return "entity_count";
    case Dimension::MajorTicks: return "major_ticks";
    case Dimension::RangeVariant: return "range_variant";
    case Dimension::Format: return "format";
    case Dimension::ChartType: return "chart_type";
  }
  return "?";
}

inline Dimension dimension_from_string(std::string_view s) {
  return detail::enum_from_string(s, kDimensions, "dimension");
}

// Group of an item along a dimension as (sort rank, label); rank < 0 means the
// item does not vary along that dimension (e.g. a Part-D item has no range variant).
inline std::pair<int, std::string> group_of(const BenchmarkItem& it, Dimension d) {
  switch (d) {
    case Dimension::DigitLength: return {it.digit_length, std::to_string(it.digit_length)};
    case Dimension::EntityCount: return {it.entity_count, std::to_string(it.entity_count)};
    case Dimension::ChartType: return {static_cast<int>(it.chart_type), std::string(to_string(it.chart_type))};
    case Dimension::MajorTicks:
      switch (it.condition) {
        case Condition::Ticks3: return {3, "3"};
        case Condition::Base: return {6, "6"};
        case Condition::Ticks11: return {11, "11"};
        default: return {-1, {}};
      }
    case Dimension::RangeVariant:
      switch (it.condition) {
        case Condition::Base: return {0, "base"};
        case Condition::Pos: return {1, "pos"};
        case Condition::Neg: return {2, "neg"};
        case Condition::Ext: return {3, "ext"};
        default: return {-1, {}};
      }
    case Dimension::Format:
      switch (it.condition) {
        case Condition::Base: return {0, "plain"};
        case Condition::Comma: return {1, "comma"};
        case Condition::Sci: return {2, "scientific"};
        case Condition::Abbr: return {3, "abbrev"};
        default: return {-1, {}};
      }
  }
  return {-1, {}};
}

inline std::vector<std::string> legal_groups(Dimension d) {
  std::vector<std::string> out;
  switch (d) {
    case Dimension::DigitLength:
      for (int i = 0; i <= 16; ++i) out.push_back(std::to_string(i));
      break;
    case Dimension::EntityCount:
      for (int i = 1; i <= 6; ++i) out.push_back(std::to_string(i));
      break;
    case Dimension::MajorTicks: out = {"3", "6", "11"}; break;
    case Dimension::RangeVariant: out = {"base", "pos", "neg", "ext"}; break;
    case Dimension::Format: out = {"plain", "comma", "scientific", "abbrev"}; break;
    case Dimension::ChartType: out = {"line", "dot", "bar"}; break;
  }
  return out;
}

struct GroupRow {
  std::string group;
  std::size_t n = 0;
  std::map<Metric, double> mean;  // reporting units: x100 for bounded metrics
};

struct Aggregate {
  Dimension dimension = Dimension::DigitLength;
  std::vector<GroupRow> groups;
  std::vector<std::string> warnings;
};

// Per-group arithmetic means of every metric over rows that the manifest places on
// this dimension.  Groups follow the dimension's natural order; empty legal groups
// are omitted with a warning.
inline Aggregate aggregate(const std::vector<ScoreRow>& rows, const Manifest& manifest, Dimension dim) {
  std::map<std::string, const BenchmarkItem*> by_id;
  for (const auto& it : manifest.items) by_id.emplace(it.id, &it);
  std::map<int, std::pair<std::string, std::vector<const ScoreRow*>>> buckets;
  for (const auto& r : rows) {
    auto f = by_id.find(r.item_id);
    if (f == by_id.end()) throw ConfigError("score row for unknown item '" + r.item_id + "'");
    auto [rank, label] = group_of(*f->second, dim);
    if (rank < 0) continue;
    auto& b = buckets[rank];
    b.first = label;
    b.second.push_back(&r);
  }
  Aggregate out;
  out.dimension = dim;
  for (const auto& [rank, bucket] : buckets) {
    GroupRow g;
    g.group = bucket.first;
    g.n = bucket.second.size();
    for (Metric m : kMetrics) {
      double s = 0;
      for (const auto* r : bucket.second) s += reported_value(r->score, m);
      g.mean[m] = s / static_cast<double>(g.n);
    }
    out.groups.push_back(std::move(g));
  }
  if (!out.groups.empty()) {
    std::string missing;
    for (const auto& legal : legal_groups(dim)) {
      const bool present = std::any_of(out.groups.begin(), out.groups.end(), [&](const GroupRow& g) { return g.group == legal; });
      if (!present) missing += (missing.empty() ? "" : ",") + legal;
    }
    if (!missing.empty()) out.warnings.push_back(std::string(to_string(dim)) + " groups without scores omitted: " + missing);
  }
  return out;
}

// Tie-break on the rank sums when the mean difference is exactly zero.
inline Direction wilcoxon_direction(const TestResult& r) {
  const double total = static_cast<double>(r.n_nonzero) * static_cast<double>(r.n_nonzero + 1) / 2.0;
  return r.w_plus * 2 > total ? Direction::BaseBetter : Direction::ComparedBetter;
}

struct Comparison {
  std::string model;
  std::string prompt_variant;
  Condition base = Condition::Base;
  Condition other = Condition::Base;
  Metric metric = Metric::RmsTbeF1;
  TestResult result;
};

// Pairs items of two conditions on (source table, chart type) and runs the
// Wilcoxon test base vs. other.  Direction follows the sign of the mean paired
// difference when significant.
inline TestResult compare_conditions(const std::vector<ScoreRow>& rows, const Manifest& manifest, Condition base,
                                     Condition other, Metric metric, double alpha = kAlpha) {
  std::map<std::string, const BenchmarkItem*> by_id;
  for (const auto& it : manifest.items) by_id.emplace(it.id, &it);
  using Key = std::pair<std::string, ChartType>;
  std::map<Key, double> base_scores, other_scores;
  for (const auto& r : rows) {
    auto f = by_id.find(r.item_id);
    if (f == by_id.end()) continue;
    const BenchmarkItem& it = *f->second;
    const Key key{it.source_table_id, it.chart_type};
    if (it.condition == base) base_scores[key] = reported_value(r.score, metric);
    if (it.condition == other) other_scores[key] = reported_value(r.score, metric);
  }
  std::vector<double> x, y;
  std::size_t excluded = 0;
  for (const auto& [k, v] : base_scores) {
    auto f = other_scores.find(k);
    if (f == other_scores.end()) {
      ++excluded;
      continue;
    }
    x.push_back(v);
    y.push_back(f->second);
  }
  for (const auto& [k, v] : other_scores)
    if (!base_scores.count(k)) ++excluded;
  TestResult res = wilcoxon_signed_rank(x, y, WilcoxonMode::Auto, alpha);
  res.excluded = excluded;
  if (res.p_value < alpha)
    res.direction = res.mean_difference > 0   ? Direction::BaseBetter
                    : res.mean_difference < 0 ? Direction::ComparedBetter
                                              : wilcoxon_direction(res);
  else
    res.direction = Direction::NoDifference;
  return res;
}

// ---- whole-run analysis ------------------------------------------------------------

struct ModelAnalysis {
  std::string model;
  std::string prompt_variant;
  std::vector<Aggregate> aggregates;  // one per dimension that has data
  std::vector<Comparison> comparisons;
};

inline const std::vector<std::pair<Condition, Condition>>& standard_comparisons() {
  static const std::vector<std::pair<Condition, Condition>> kPairs{
      {Condition::Base, Condition::Ticks3}, {Condition::Base, Condition::Ticks11}, {Condition::Base, Condition::Pos},
      {Condition::Base, Condition::Neg},    {Condition::Base, Condition::Ext},     {Condition::Base, Condition::Comma},
      {Condition::Base, Condition::Sci},    {Condition::Base, Condition::Abbr}};
  return kPairs;
}

// Digit-length and entity-count groupings use Part-A items only, the other
// dimensions compare Part-A base items with their Part B/C/D counterparts.
inline std::vector<ModelAnalysis> analyze(const std::vector<ScoreRow>& rows, const Manifest& manifest,
                                          Metric test_metric = Metric::RmsTbeF1) {
  std::map<std::string, Part> part_of_item;
  for (const auto& it : manifest.items) part_of_item.emplace(it.id, it.part);
  std::map<std::pair<std::string, std::string>, std::vector<ScoreRow>> by_model;
  for (const auto& r : rows) by_model[{r.model, r.prompt_variant}].push_back(r);

  std::vector<ModelAnalysis> out;
  for (const auto& [key, model_rows] : by_model) {
    ModelAnalysis ma;
    ma.model = key.first;
    ma.prompt_variant = key.second;
    std::vector<ScoreRow> part_a;
    for (const auto& r : model_rows) {
      auto f = part_of_item.find(r.item_id);
      if (f != part_of_item.end() && f->second == Part::A) part_a.push_back(r);
    }
    for (Dimension d : kDimensions) {
      const bool part_a_only = d == Dimension::DigitLength || d == Dimension::EntityCount || d == Dimension::ChartType;
      Aggregate agg = aggregate(part_a_only ? part_a : model_rows, manifest, d);
      // Tick/range/format dimensions only make sense with a counterpart beyond base.
      if (!part_a_only && agg.groups.size() < 2) continue;
      if (!agg.groups.empty()) ma.aggregates.push_back(std::move(agg));
    }
    for (auto [base, other] : standard_comparisons()) {
      TestResult tr = compare_conditions(model_rows, manifest, base, other, test_metric);
      if (tr.n_pairs == 0) continue;
      ma.comparisons.push_back({ma.model, ma.prompt_variant, base, other, test_metric, tr});
    }
    out.push_back(std::move(ma));
  }
  return out;
}

inline json to_json_value(const TestResult& t) {
  return json{{"statistic", t.statistic},     {"w_plus", t.w_plus},       {"p_value", t.p_value},
              {"n_pairs", t.n_pairs},         {"n_nonzero", t.n_nonzero}, {"excluded", t.excluded},
              {"mean_difference", t.mean_difference}, {"exact", t.exact},
              {"direction", std::string(to_string(t.direction))}};
}

inline json to_json_value(const ModelAnalysis& ma) {
  json j{{"model", ma.model}, {"prompt_variant", ma.prompt_variant}};
  json aggs = json::object();
  for (const auto& a : ma.aggregates) {
    json groups = json::array();
    for (const auto& g : a.groups) {
      json row{{"group", g.group}, {"n", g.n}};
      for (const auto& [m, v] : g.mean) row[std::string(to_string(m))] = v;
      groups.push_back(std::move(row));
    }
    aggs[std::string(to_string(a.dimension))] = {{"groups", groups}, {"warnings", a.warnings}};
  }
  j["aggregates"] = std::move(aggs);
  json comps = json::array();
  for (const auto& c : ma.comparisons) {
    json row = to_json_value(c.result);
    row["base"] = std::string(to_string(c.base));
    row["other"] = std::string(to_string(c.other));
    row["metric"] = std::string(to_string(c.metric));
    comps.push_back(std::move(row));
  }
  j["comparisons"] = std::move(comps);
  return j;
}

// ---- report files ------------------------------------------------------------------

namespace detail {
inline std::string safe_file_part(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

inline std::string aggregate_csv(const Aggregate& a) {
  std::string out = std::string(to_string(a.dimension)) + ",n";
  for (Metric m : kMetrics) out += "," + std::string(to_string(m));
  out += "\n";
  for (const auto& g : a.groups) {
    out += g.group + "," + std::to_string(g.n);
    for (Metric m : kMetrics) out += "," + detail::csv_number(g.mean.at(m));
    out += "\n";
  }
  return out;
}

// Grouped means of the bounded F1-style metrics on a 0..100 axis.
inline Rendered aggregate_plot(const Aggregate& a) {
  static constexpr Metric kPlotted[] = {Metric::RmsTbeF1, Metric::RmsTbeF1Sig, Metric::RnssTbeF1, Metric::RmsF1};
  DataTable t;
  t.id = std::string(to_string(a.dimension));
  for (Metric m : kPlotted) t.col_headers.emplace_back(to_string(m));
  for (const auto& g : a.groups) {
    t.row_headers.push_back(g.group);
    std::vector<Cell> row;
    for (Metric m : kPlotted) row.emplace_back(std::clamp(g.mean.at(m), 0.0, 100.0));
    t.cells.push_back(std::move(row));
  }
  AxisSpec axis;
  for (int i = 0; i <= 5; ++i) axis.tick_values.push_back(20.0 * i);
  axis.major_interval = 20.0;
  axis.minor_estimate_t = 4.0;
  const ChartType type = a.groups.size() >= 2 ? ChartType::Line : ChartType::Bar;
  return render_chart(type, t, axis, StyleSpec{});
}
}  // namespace detail

// Per model/variant: one CSV and one PNG plot per dimension, plus a comparisons
// CSV for all models.  Returns the files written.
inline std::vector<std::filesystem::path> emit_report(const std::vector<ModelAnalysis>& analyses,
                                                      const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  bool any = false;
  for (const auto& ma : analyses) any = any || !ma.aggregates.empty();
  if (!any) throw ConfigError("emit_report: nothing to report (no scores)");
  std::filesystem::create_directories(out_dir);
  std::string comparisons = "model,prompt_variant,base,other,metric,statistic,p_value,n_pairs,excluded,direction\n";
  bool have_comparisons = false;
  for (const auto& ma : analyses) {
    const std::string prefix = detail::safe_file_part(ma.model) + "__" + detail::safe_file_part(ma.prompt_variant) + "__";
    for (const auto& a : ma.aggregates) {
      const auto csv_path = out_dir / (prefix + std::string(to_string(a.dimension)) + ".csv");
      write_text_file(csv_path, detail::aggregate_csv(a));
      written.push_back(csv_path);
      const auto plot = detail::aggregate_plot(a);
      const auto png_path = out_dir / (prefix + std::string(to_string(a.dimension)) + ".png");
      write_text_file(png_path, std::string(plot.png.begin(), plot.png.end()));
      written.push_back(png_path);
    }
    for (const auto& c : ma.comparisons) {
      have_comparisons = true;
      comparisons += detail::csv_escape(c.model) + "," + detail::csv_escape(c.prompt_variant) + "," +
                     std::string(to_string(c.base)) + "," + std::string(to_string(c.other)) + "," +
                     std::string(to_string(c.metric)) + "," + detail::csv_number(c.result.statistic) + "," +
                     detail::csv_number(c.result.p_value) + "," + std::to_string(c.result.n_pairs) + "," +
                     std::to_string(c.result.excluded) + "," + std::string(to_string(c.result.direction)) + "\n";
    }
  }
  if (have_comparisons) {
    const auto path = out_dir / "comparisons.csv";
    write_text_file(path, comparisons);
    written.push_back(path);
  }
  return written;
}

}  // namespace fc2t
