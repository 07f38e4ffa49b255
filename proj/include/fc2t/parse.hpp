#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "numformat.hpp"
#include "table.hpp"

namespace fc2t {

enum class Dialect { Linearized, Markdown, DelimiterFree, Failed };

inline std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::Linearized: return "linearized";
    case Dialect::Markdown: return "markdown";
    case Dialect::DelimiterFree: return "delimiter_free";
    case Dialect::Failed: return "failed";
  }
  return "?";
}

struct ParseDiagnostics {
  Dialect dialect_detected = Dialect::Failed;
  std::size_t dropped_lines = 0;
  std::size_t unparsed_cells = 0;
  bool orientation_transposed = false;
};

struct ParsedPrediction {
  DataTable table;
  ParseDiagnostics diagnostics;
};

struct ParseOptions {
  bool transpose = false;  // swap rows and columns after parsing
};

// Lowercased, trimmed of surrounding whitespace and punctuation, internal
// whitespace collapsed.  Brackets survive so "GDP (USD)" keeps its unit.
inline std::string canonicalize_header(std::string_view s) {
  auto is_trim_punct = [](unsigned char c) {
    return std::isspace(c) || (std::ispunct(c) && c != '(' && c != ')' && c != '[' && c != ']' && c != '%' &&
                               c != '$' && c != '#');
  };
  std::size_t b = 0, e = s.size();
  while (b < e && is_trim_punct(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_trim_punct(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out;
  bool pending_space = false;
  for (std::size_t i = b; i < e; ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// "corner | A | B\n2018 | 1 | 2" -- the dialect parse_prediction reads back losslessly.
inline std::string to_linearized(const DataTable& t, std::string_view corner = "Category") {
  std::string out(corner);
  for (const auto& h : t.col_headers) out += " | " + h;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out += "\n" + t.row_headers[r];
    for (std::size_t c = 0; c < t.cols(); ++c) {
      out += " | ";
      if (r < t.cells.size() && c < t.cells[r].size() && t.cells[r][c]) out += shortest_repr(*t.cells[r][c]);
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_lines(std::string text) {
  for (std::size_t pos; (pos = text.find("<0x0A>")) != std::string::npos;) text.replace(pos, 6, "\n");
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

inline std::vector<std::string> split_pipes(std::string_view line) {
  std::string_view s = trim(line);
  if (!s.empty() && s.front() == '|') s.remove_prefix(1);
  if (!s.empty() && s.back() == '|') s.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto bar = s.find('|', start);
    cells.emplace_back(trim(s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return cells;
}

inline bool is_rule_row(const std::vector<std::string>& cells) {
  bool any = false;
  for (const auto& c : cells) {
    if (c.empty()) continue;
    for (char ch : c)
      if (ch != '-' && ch != ':' && ch != '=' && ch != '+') return false;
    any = true;
  }
  return any;
}

// Fields separated by tabs or by runs of two or more spaces.
inline std::vector<std::string> split_wide_space(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t spaces = 0;
  auto flush = [&] {
    auto t = trim(cur);
    if (!t.empty()) out.emplace_back(t);
    cur.clear();
  };
  for (char c : line) {
    if (c == '\t') {
      flush();
      spaces = 0;
    } else if (c == ' ') {
      ++spaces;
      cur.push_back(c);
      if (spaces == 2) flush();
    } else {
      if (spaces >= 2) cur.clear();
      spaces = 0;
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

struct Block {
  Dialect dialect;
  std::vector<std::vector<std::string>> rows;
  std::size_t dropped = 0;
};

inline std::size_t block_cells(const Block& b) {
  if (b.rows.size() < 2) return 0;
  return (b.rows.size() - 1) * (b.rows.front().size() > 0 ? b.rows.front().size() - 1 : 0);
}

inline bool looks_like_title_row(const std::vector<std::string>& cells) {
  if (cells.empty() || cells.size() > 2) return false;
  const std::string head = lower(cells.front());
  return head == "title" || head == "chart title";
}

inline std::vector<Block> find_blocks(const std::vector<std::string>& lines) {
  std::vector<Block> blocks;
  Block cur{Dialect::Linearized, {}, 0};
  bool in_block = false;
  auto close = [&] {
    if (in_block && cur.rows.size() >= 2) blocks.push_back(cur);
    cur = Block{Dialect::Linearized, {}, 0};
    in_block = false;
  };
  for (const auto& raw : lines) {
    std::string_view line = trim(raw);
    if (line.find('|') == std::string_view::npos) {
      close();
      continue;
    }
    auto cells = split_pipes(line);
    if (!in_block) {
      in_block = true;
      cur.dialect = line.front() == '|' ? Dialect::Markdown : Dialect::Linearized;
    }
    if (is_rule_row(cells)) {
      cur.dialect = Dialect::Markdown;
      ++cur.dropped;
      continue;
    }
    if (cur.rows.empty() && looks_like_title_row(cells)) {
      ++cur.dropped;
      continue;
    }
    cur.rows.push_back(std::move(cells));
  }
  close();

  if (blocks.empty()) {
    // No pipes anywhere: try tab / wide-space separated columns.
    Block ws{Dialect::DelimiterFree, {}, 0};
    auto flush_ws = [&] {
      if (ws.rows.size() >= 2) blocks.push_back(ws);
      ws = Block{Dialect::DelimiterFree, {}, 0};
    };
    for (const auto& raw : lines) {
      auto fields = split_wide_space(raw);
      if (fields.size() >= 2 && (ws.rows.empty() || fields.size() == ws.rows.front().size() ||
                                 fields.size() + 1 == ws.rows.front().size())) {
        ws.rows.push_back(std::move(fields));
      } else {
        flush_ws();
        if (fields.size() >= 2) ws.rows.push_back(std::move(fields));
      }
    }
    flush_ws();
  }
  return blocks;
}

}  // namespace detail

// Parses raw model output into a table.  The first row holds the column headers
// (after a corner cell), the first cell of each further row is the row header,
// every other cell goes through parse_number; unparseable cells become absent.
// If several tables appear, the one with most cells wins.
inline ParsedPrediction parse_prediction(std::string_view text, ParseOptions opts = {}) {
  ParsedPrediction out;
  const auto lines = detail::split_lines(std::string(text));
  auto blocks = detail::find_blocks(lines);
  if (blocks.empty()) return out;

  const auto best = std::max_element(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    return detail::block_cells(a) < detail::block_cells(b);
  });
  const detail::Block& blk = *best;
  if (detail::block_cells(blk) == 0) return out;

  std::size_t non_blank = 0;
  for (const auto& l : lines)
    if (!detail::trim(l).empty()) ++non_blank;

  DataTable& t = out.table;
  const auto& header = blk.rows.front();
  std::size_t n_cols = header.size() - 1;
  // A header row without a corner cell is one short of the data rows.
  bool header_has_corner = true;
  if (blk.rows.size() > 1 && blk.rows[1].size() == header.size() + 1) {
    header_has_corner = false;
    n_cols = header.size();
  }
  t.col_headers.assign(header.begin() + (header_has_corner ? 1 : 0), header.end());
  for (std::size_t r = 1; r < blk.rows.size(); ++r) {
    const auto& row = blk.rows[r];
    t.row_headers.push_back(row.empty() ? std::string{} : row.front());
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c + 1 >= row.size()) {
        cells.emplace_back();
        ++out.diagnostics.unparsed_cells;
        continue;
      }
      try {
        cells.emplace_back(parse_number(row[c + 1]));
      } catch (const ParseError&) {
        cells.emplace_back();
        ++out.diagnostics.unparsed_cells;
      }
    }
    t.cells.push_back(std::move(cells));
  }

  std::size_t used = blk.rows.size() + blk.dropped;
  out.diagnostics.dropped_lines = non_blank > used ? non_blank - used : 0;
  out.diagnostics.dropped_lines += blk.dropped;
  out.diagnostics.dialect_detected = blk.dialect;

  if (opts.transpose) {
    DataTable tt;
    tt.row_headers = t.col_headers;
    tt.col_headers = t.row_headers;
    tt.cells.assign(tt.row_headers.size(), std::vector<Cell>(tt.col_headers.size()));
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c) tt.cells[c][r] = t.cells[r][c];
    t = std::move(tt);
    out.diagnostics.orientation_transposed = true;
  }
  return out;
}

}  // namespace fc2t
