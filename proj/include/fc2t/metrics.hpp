#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "assignment.hpp"
#include "errors.hpp"
#include "parse.hpp"
#include "table.hpp"

namespace fc2t {

// ---- distances -------------------------------------------------------------------

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

// Relative distance.  g == 0 has no relative scale: exact 0 scores 0, anything else 1.
inline double d_rms(double g, double p) {
  if (g == 0.0) return p == 0.0 ? 0.0 : 1.0;
  return std::min(1.0, std::abs(g - p) / std::abs(g));
}

namespace detail {
inline void check_t(double t) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("tick-based distance needs a finite t > 0");
}
}  // namespace detail

inline double d_tbe_raw(double g, double p, double t) {
  detail::check_t(t);
  return std::abs(g - p) / t;
}

inline double d_tbe(double g, double p, double t) { return std::min(1.0, d_tbe_raw(g, p, t)); }

// 1 when the error reaches a full minor-tick estimate (threshold inclusive).
inline double d_tbe_sig(double g, double p, double t) { return d_tbe_raw(g, p, t) >= 1.0 ? 1.0 : 0.0; }

// ---- alignment -------------------------------------------------------------------

struct Datapoint {
  std::string row_header;
  std::string col_header;
  Cell value;
};

inline std::vector<Datapoint> flatten(const DataTable& t) {
  std::vector<Datapoint> out;
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) {
      Cell v;
      if (r < t.cells.size() && c < t.cells[r].size()) v = t.cells[r][c];
      out.push_back({t.row_headers[r], t.col_headers[c], v});
    }
  return out;
}

struct MatchedPair {
  std::size_t pred = 0;   // index into flatten(pred)
  std::size_t truth = 0;  // index into flatten(truth)
  double header_cost = 0.0;
};

struct Alignment {
  std::vector<MatchedPair> pairs;
  std::size_t n_pred = 0;
  std::size_t n_truth = 0;

  // Exactly rounded, so it does not depend on pair order.
  double total_cost() const {
    std::vector<double> costs;
    for (const auto& p : pairs) costs.push_back(p.header_cost);
    return exact_sum(costs);
  }
};

// Header distance between two datapoints: mean of the normalized Levenshtein
// distances of the canonical row headers and of the canonical column headers.
inline double header_cost(const Datapoint& truth, const Datapoint& pred) {
  return 0.5 * (normalized_levenshtein(canonicalize_header(truth.row_header), canonicalize_header(pred.row_header)) +
                normalized_levenshtein(canonicalize_header(truth.col_header), canonicalize_header(pred.col_header)));
}

inline std::vector<double> header_cost_matrix(const DataTable& truth, const DataTable& pred) {
  // Cost only depends on (row, col) header pairs: cache per header pair.
  auto cache = [](const std::vector<std::string>& p, const std::vector<std::string>& t) {
    std::vector<double> out(p.size() * t.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < t.size(); ++j)
        out[i * t.size() + j] = normalized_levenshtein(canonicalize_header(p[i]), canonicalize_header(t[j]));
    return out;
  };
  const auto rows = cache(pred.row_headers, truth.row_headers);
  const auto cols = cache(pred.col_headers, truth.col_headers);
  const std::size_t n = pred.size(), m = truth.size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pr = i / pred.cols(), pc = i % pred.cols();
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t tr = j / truth.cols(), tc = j % truth.cols();
      cost[i * m + j] = 0.5 * (rows[pr * truth.rows() + tr] + cols[pc * truth.cols() + tc]);
    }
  }
  return cost;
}

// Minimal-total-header-cost matching of size min(n, m) between predicted and
// ground-truth datapoints.
inline Alignment match_headers(const DataTable& truth, const DataTable& pred) {
  Alignment a;
  a.n_pred = pred.size();
  a.n_truth = truth.size();
  if (a.n_pred == 0 || a.n_truth == 0) return a;
  const auto cost = header_cost_matrix(truth, pred);
  for (auto [i, j] : min_cost_assignment(cost, a.n_pred, a.n_truth)) a.pairs.push_back({i, j, cost[i * a.n_truth + j]});
  return a;
}

// Matching on values alone (headers ignored), cost = clamped tick-based distance;
// an absent predicted value costs 1.
inline Alignment match_values(const DataTable& truth, const DataTable& pred, double t) {
  detail::check_t(t);
  Alignment a;
  const auto tp = flatten(truth), pp = flatten(pred);
  a.n_pred = pp.size();
  a.n_truth = tp.size();
  if (a.n_pred == 0 || a.n_truth == 0) return a;
  std::vector<double> cost(a.n_pred * a.n_truth);
  for (std::size_t i = 0; i < a.n_pred; ++i)
    for (std::size_t j = 0; j < a.n_truth; ++j)
      cost[i * a.n_truth + j] = pp[i].value && tp[j].value ? d_tbe(*tp[j].value, *pp[i].value, t) : 1.0;
  for (auto [i, j] : min_cost_assignment(cost, a.n_pred, a.n_truth)) a.pairs.push_back({i, j, cost[i * a.n_truth + j]});
  return a;
}

// ---- scores ----------------------------------------------------------------------

inline double f1_from_similarity(double similarity_sum, std::size_t n_pred, std::size_t n_truth) {
  const double precision = n_pred ? similarity_sum / static_cast<double>(n_pred) : 0.0;
  const double recall = n_truth ? similarity_sum / static_cast<double>(n_truth) : 0.0;
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

enum class SigAggregation {
  AllMatched,       // default: sub-threshold pairs count as correct, n and m dilute
  SignificantOnly,  // 1 - (#significant / #matched); unmatched datapoints ignored
};

struct ScoreOptions {
  SigAggregation sig = SigAggregation::AllMatched;
};

struct ScoreRecord {
  double rms_f1 = 0;
  double rms_f1_no_header = 0;
  double rms_tbe_f1 = 0;
  double rms_tbe_f1_sig = 0;
  double tbe_raw = 0;
  double rnss_tbe_f1 = 0;
  double ses = 0;
  std::size_t n_sig_cells = 0;
  double t_used = 0;
  // alignment diagnostics
  std::size_t n_truth = 0;
  std::size_t n_pred = 0;
  std::size_t n_matched = 0;
  double header_cost = 0;

  bool operator==(const ScoreRecord&) const = default;
};

namespace detail {

inline double checked_t(const AxisSpec& axis) {
  if (!(axis.minor_estimate_t > 0) || !std::isfinite(axis.minor_estimate_t))
    throw DomainError("degenerate axis: minor tick estimate must be positive");
  return axis.minor_estimate_t;
}

inline double similarity_sum(const Alignment& a, const std::vector<Datapoint>& tp, const std::vector<Datapoint>& pp,
                             double t, double (*distance)(double, double, double)) {
  double s = 0.0;
  for (const auto& pr : a.pairs) {
    const auto& p = pp[pr.pred].value;
    const auto& g = tp[pr.truth].value;
    if (p && g) s += 1.0 - distance(*g, *p, t);
  }
  return s;
}

struct SigCounts {
  double similarity = 0;
  std::size_t significant = 0;
};

inline SigCounts sig_counts(const Alignment& a, const std::vector<Datapoint>& tp, const std::vector<Datapoint>& pp,
                            double t) {
  SigCounts out;
  for (const auto& pr : a.pairs) {
    const auto& p = pp[pr.pred].value;
    const auto& g = tp[pr.truth].value;
    const double d = p && g ? d_tbe_sig(*g, *p, t) : 1.0;
    out.similarity += 1.0 - d;
    if (d > 0) ++out.significant;
  }
  return out;
}

inline double tbe_raw_mean(const Alignment& a, const std::vector<Datapoint>& tp, const std::vector<Datapoint>& pp,
                           double t) {
  std::vector<char> truth_used(tp.size(), 0), pred_used(pp.size(), 0);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& pr : a.pairs) {
    truth_used[pr.truth] = pred_used[pr.pred] = 1;
    const auto& g = tp[pr.truth].value;
    const auto& p = pp[pr.pred].value;
    if (!g) continue;
    sum += p ? d_tbe_raw(*g, *p, t) : std::abs(*g) / t;
    ++count;
  }
  for (std::size_t j = 0; j < tp.size(); ++j)
    if (!truth_used[j] && tp[j].value) {
      sum += std::abs(*tp[j].value) / t;
      ++count;
    }
  for (std::size_t i = 0; i < pp.size(); ++i)
    if (!pred_used[i] && pp[i].value) {
      sum += std::abs(*pp[i].value) / t;
      ++count;
    }
  return count ? sum / static_cast<double>(count) : 0.0;
}

inline double rms_sum(const Alignment& a, const std::vector<Datapoint>& tp, const std::vector<Datapoint>& pp,
                      bool with_header_scores) {
  double s = 0.0;
  for (const auto& pr : a.pairs) {
    const auto& p = pp[pr.pred].value;
    const auto& g = tp[pr.truth].value;
    if (!p || !g) continue;
    const double header = with_header_scores ? 1.0 - pr.header_cost : 1.0;
    s += header * (1.0 - d_rms(*g, *p));
  }
  return s;
}

}  // namespace detail

inline double rms_tbe_f1(const DataTable& truth, const DataTable& pred, const AxisSpec& axis) {
  const double t = detail::checked_t(axis);
  const auto a = match_headers(truth, pred);
  return f1_from_similarity(detail::similarity_sum(a, flatten(truth), flatten(pred), t, d_tbe), a.n_pred, a.n_truth);
}

inline double rms_tbe_f1_sig(const DataTable& truth, const DataTable& pred, const AxisSpec& axis,
                             SigAggregation mode = SigAggregation::AllMatched) {
  const double t = detail::checked_t(axis);
  const auto a = match_headers(truth, pred);
  const auto counts = detail::sig_counts(a, flatten(truth), flatten(pred), t);
  if (mode == SigAggregation::SignificantOnly)
    return a.pairs.empty() ? 0.0
                           : 1.0 - static_cast<double>(counts.significant) / static_cast<double>(a.pairs.size());
  return f1_from_similarity(counts.similarity, a.n_pred, a.n_truth);
}

inline double tbe_raw_score(const DataTable& truth, const DataTable& pred, const AxisSpec& axis) {
  const double t = detail::checked_t(axis);
  return detail::tbe_raw_mean(match_headers(truth, pred), flatten(truth), flatten(pred), t);
}

inline double rnss_tbe_f1(const DataTable& truth, const DataTable& pred, const AxisSpec& axis) {
  const double t = detail::checked_t(axis);
  const auto a = match_values(truth, pred, t);
  return f1_from_similarity(detail::similarity_sum(a, flatten(truth), flatten(pred), t, d_tbe), a.n_pred, a.n_truth);
}

inline double ses(const DataTable& truth, const DataTable& pred, const AxisSpec& axis) {
  return rnss_tbe_f1(truth, pred, axis) - rms_tbe_f1(truth, pred, axis);
}

// Relative-distance RMS F1 on the header alignment; with header scores each cell
// similarity is additionally multiplied by (1 - header distance).
inline double rms_f1_baseline(const DataTable& truth, const DataTable& pred, bool with_header_scores) {
  const auto a = match_headers(truth, pred);
  return f1_from_similarity(detail::rms_sum(a, flatten(truth), flatten(pred), with_header_scores), a.n_pred, a.n_truth);
}

// Every metric for one (truth, prediction) pair, sharing one header alignment.
inline ScoreRecord score_prediction(const DataTable& truth, const DataTable& pred, const AxisSpec& axis,
                                    ScoreOptions opts = {}) {
  const double t = detail::checked_t(axis);
  const auto tp = flatten(truth), pp = flatten(pred);
  const auto a = match_headers(truth, pred);
  const auto values = match_values(truth, pred, t);

  ScoreRecord s;
  s.t_used = t;
  s.n_truth = a.n_truth;
  s.n_pred = a.n_pred;
  s.n_matched = a.pairs.size();
  s.header_cost = a.total_cost();
  s.rms_f1 = f1_from_similarity(detail::rms_sum(a, tp, pp, true), a.n_pred, a.n_truth);
  s.rms_f1_no_header = f1_from_similarity(detail::rms_sum(a, tp, pp, false), a.n_pred, a.n_truth);
  s.rms_tbe_f1 = f1_from_similarity(detail::similarity_sum(a, tp, pp, t, d_tbe), a.n_pred, a.n_truth);
  const auto counts = detail::sig_counts(a, tp, pp, t);
  s.n_sig_cells = counts.significant;
  if (opts.sig == SigAggregation::SignificantOnly)
    s.rms_tbe_f1_sig = a.pairs.empty() ? 0.0 : 1.0 - static_cast<double>(counts.significant) / a.pairs.size();
  else
    s.rms_tbe_f1_sig = f1_from_similarity(counts.similarity, a.n_pred, a.n_truth);
  s.tbe_raw = detail::tbe_raw_mean(a, tp, pp, t);
  s.rnss_tbe_f1 = f1_from_similarity(detail::similarity_sum(values, tp, pp, t, d_tbe), values.n_pred, values.n_truth);
  s.ses = s.rnss_tbe_f1 - s.rms_tbe_f1;
  return s;
}

}  // namespace fc2t
