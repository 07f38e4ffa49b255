#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "benchmark.hpp"
#include "metrics.hpp"
#include "parse.hpp"
#include "prediction.hpp"

namespace fc2t {

enum class Metric { RmsF1, RmsF1NoHeader, RmsTbeF1, RmsTbeF1Sig, TbeRaw, RnssTbeF1, Ses };

inline constexpr std::array kMetrics{Metric::RmsF1,  Metric::RmsF1NoHeader, Metric::RmsTbeF1, Metric::RmsTbeF1Sig,
                                     Metric::TbeRaw, Metric::RnssTbeF1,     Metric::Ses};

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::RmsF1: return "rms_f1";
    case Metric::RmsF1NoHeader: return "rms_f1_no_header";
    case Metric::RmsTbeF1: return "rms_tbe_f1";
    case Metric::RmsTbeF1Sig: return "rms_tbe_f1_sig";
    case Metric::TbeRaw: return "tbe_raw";
    case Metric::RnssTbeF1: return "rnss_tbe_f1";
    case Metric::Ses: return "ses";
  }
  return "?";
}

inline Metric metric_from_string(std::string_view s) { return detail::enum_from_string(s, kMetrics, "metric"); }

// Everything except TBE-Raw lives in [0,1] or [-1,1] and is reported x100.
inline bool reported_as_percent(Metric m) { return m != Metric::TbeRaw; }

inline double metric_value(const ScoreRecord& s, Metric m) {
  switch (m) {
    case Metric::RmsF1: return s.rms_f1;
    case Metric::RmsF1NoHeader: return s.rms_f1_no_header;
    case Metric::RmsTbeF1: return s.rms_tbe_f1;
    case Metric::RmsTbeF1Sig: return s.rms_tbe_f1_sig;
    case Metric::TbeRaw: return s.tbe_raw;
    case Metric::RnssTbeF1: return s.rnss_tbe_f1;
    case Metric::Ses: return s.ses;
  }
  return 0.0;
}

inline double reported_value(const ScoreRecord& s, Metric m) {
  return reported_as_percent(m) ? 100.0 * metric_value(s, m) : metric_value(s, m);
}

struct ScoreRow {
  std::string item_id;
  std::string model;
  std::string prompt_variant;
  bool parse_failed = false;
  std::string dialect;
  ScoreRecord score;
};

struct ScoreRun {
  std::vector<ScoreRow> rows;
  std::size_t skipped_failed_queries = 0;
  std::size_t parse_failures = 0;
};

// One row per successful prediction record; records whose query failed carry no
// output and are skipped (and counted).  Unparseable output is scored against an
// empty table and flagged.
inline ScoreRun score_predictions(const Manifest& manifest, const std::vector<PredictionRecord>& predictions,
                                  ScoreOptions opts = {}, ParseOptions parse_opts = {}) {
  std::map<std::string, const BenchmarkItem*> by_id;
  for (const auto& it : manifest.items) by_id.emplace(it.id, &it);

  ScoreRun run;
  for (const auto& rec : predictions) {
    if (!rec.ok()) {
      ++run.skipped_failed_queries;
      continue;
    }
    auto found = by_id.find(rec.item_id);
    if (found == by_id.end()) throw ConfigError("prediction for unknown item '" + rec.item_id + "'");
    const BenchmarkItem& item = *found->second;
    const DataTable& truth = manifest.table_for(item);
    const auto parsed = parse_prediction(rec.raw_text, parse_opts);
    ScoreRow row;
    row.item_id = rec.item_id;
    row.model = rec.model;
    row.prompt_variant = rec.prompt_variant;
    row.dialect = std::string(to_string(parsed.diagnostics.dialect_detected));
    row.parse_failed = parsed.diagnostics.dialect_detected == Dialect::Failed;
    if (row.parse_failed) ++run.parse_failures;
    row.score = score_prediction(truth, parsed.table, item.axis, opts);
    run.rows.push_back(std::move(row));
  }
  return run;
}

// ---- score files --------------------------------------------------------------------

inline json score_row_json(const ScoreRow& r) {
  const auto& s = r.score;
  json j{{"schema_version", kSchemaVersion},
         {"item_id", r.item_id},
         {"model", r.model},
         {"prompt_variant", r.prompt_variant},
         {"parse_failed", r.parse_failed},
         {"dialect", r.dialect},
         {"rms_f1", s.rms_f1},
         {"rms_f1_no_header", s.rms_f1_no_header},
         {"rms_tbe_f1", s.rms_tbe_f1},
         {"rms_tbe_f1_sig", s.rms_tbe_f1_sig},
         {"tbe_raw", s.tbe_raw},
         {"rnss_tbe_f1", s.rnss_tbe_f1},
         {"ses", s.ses},
         {"n_sig_cells", s.n_sig_cells},
         {"t_used", s.t_used},
         {"n_truth", s.n_truth},
         {"n_pred", s.n_pred},
         {"n_matched", s.n_matched},
         {"header_cost", s.header_cost}};
  for (Metric m : kMetrics)
    if (reported_as_percent(m)) j[std::string(to_string(m)) + "_pct"] = reported_value(s, m);
  return j;
}

inline ScoreRow score_row_from_json(const json& j) {
  ScoreRow r;
  r.item_id = j.at("item_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.prompt_variant = j.at("prompt_variant").get<std::string>();
  r.parse_failed = j.value("parse_failed", false);
  r.dialect = j.value("dialect", std::string{});
  auto& s = r.score;
  s.rms_f1 = j.at("rms_f1").get<double>();
  s.rms_f1_no_header = j.at("rms_f1_no_header").get<double>();
  s.rms_tbe_f1 = j.at("rms_tbe_f1").get<double>();
  s.rms_tbe_f1_sig = j.at("rms_tbe_f1_sig").get<double>();
  s.tbe_raw = j.at("tbe_raw").get<double>();
  s.rnss_tbe_f1 = j.at("rnss_tbe_f1").get<double>();
  s.ses = j.at("ses").get<double>();
  s.n_sig_cells = j.value("n_sig_cells", std::size_t{0});
  s.t_used = j.value("t_used", 0.0);
  s.n_truth = j.value("n_truth", std::size_t{0});
  s.n_pred = j.value("n_pred", std::size_t{0});
  s.n_matched = j.value("n_matched", std::size_t{0});
  s.header_cost = j.value("header_cost", 0.0);
  return r;
}

namespace detail {
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) { return std::isfinite(v) ? shortest_repr(v) : std::string("nan"); }
}  // namespace detail

inline std::string scores_to_csv(const std::vector<ScoreRow>& rows) {
  std::string out =
      "item_id,model,prompt_variant,parse_failed,dialect,rms_f1,rms_f1_no_header,rms_tbe_f1,rms_tbe_f1_sig,tbe_raw,"
      "rnss_tbe_f1,ses,n_sig_cells,t_used,n_truth,n_pred,n_matched,header_cost";
  for (Metric m : kMetrics)
    if (reported_as_percent(m)) out += "," + std::string(to_string(m)) + "_pct";
  out += "\n";
  for (const auto& r : rows) {
    const auto& s = r.score;
    out += detail::csv_escape(r.item_id) + "," + detail::csv_escape(r.model) + "," +
           detail::csv_escape(r.prompt_variant) + "," + (r.parse_failed ? "1" : "0") + "," + r.dialect;
    for (double v : {s.rms_f1, s.rms_f1_no_header, s.rms_tbe_f1, s.rms_tbe_f1_sig, s.tbe_raw, s.rnss_tbe_f1, s.ses})
      out += "," + detail::csv_number(v);
    out += "," + std::to_string(s.n_sig_cells) + "," + detail::csv_number(s.t_used) + "," +
           std::to_string(s.n_truth) + "," + std::to_string(s.n_pred) + "," + std::to_string(s.n_matched) + "," +
           detail::csv_number(s.header_cost);
    for (Metric m : kMetrics)
      if (reported_as_percent(m)) out += "," + detail::csv_number(reported_value(s, m));
    out += "\n";
  }
  return out;
}

inline std::string scores_to_jsonl(const std::vector<ScoreRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += score_row_json(r).dump() + "\n";
  return out;
}

inline std::vector<ScoreRow> read_scores_jsonl(const std::filesystem::path& path) {
  std::vector<ScoreRow> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(score_row_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fc2t
