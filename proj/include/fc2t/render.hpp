#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "benchmark.hpp"
#include "errors.hpp"
#include "font5x7.hpp"
#include "numformat.hpp"
#include "png.hpp"
#include "table.hpp"

namespace fc2t {

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct StyleSpec {
  int width = 800;
  int height = 600;
  std::string font_family = "fc2t-5x7";  // the bundled bitmap font; the only one supported
  int font_size = 2;                     // glyph pixel scale
  std::vector<Rgb> palette{{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                           {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};
  std::string legend_position = "top";
  bool grid = true;
  int scale = 1;  // dpi-equivalent multiplier applied to every pixel dimension

  bool operator==(const StyleSpec&) const = default;
};

inline std::vector<std::string> validate_style(const StyleSpec& s) {
  std::vector<std::string> out;
  if (s.width < 200 || s.height < 150) out.push_back("canvas smaller than 200x150");
  if (s.font_size < 1 || s.scale < 1) out.push_back("font_size and scale must be >= 1");
  if (s.font_family != "fc2t-5x7") out.push_back("unsupported font family '" + s.font_family + "'");
  if (s.palette.size() < 6) out.push_back("palette needs at least 6 colours");
  for (std::size_t i = 0; i < s.palette.size(); ++i)
    for (std::size_t j = i + 1; j < s.palette.size(); ++j)
      if (s.palette[i] == s.palette[j]) out.push_back("palette colours must be distinct");
  if (s.legend_position != "top") out.push_back("legend_position must be 'top'");
  return out;
}

inline void to_json(json& j, const StyleSpec& s) {
  json pal = json::array();
  for (const auto& c : s.palette) pal.push_back({c.r, c.g, c.b});
  j = json{{"width", s.width},       {"height", s.height},   {"font_family", s.font_family},
           {"font_size", s.font_size}, {"palette", pal},     {"legend_position", s.legend_position},
           {"grid", s.grid},         {"scale", s.scale}};
}

inline void from_json(const json& j, StyleSpec& s) {
  s = StyleSpec{};
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.font_family = j.value("font_family", s.font_family);
  s.font_size = j.value("font_size", s.font_size);
  s.legend_position = j.value("legend_position", s.legend_position);
  s.grid = j.value("grid", s.grid);
  s.scale = j.value("scale", s.scale);
  if (j.contains("palette")) {
    s.palette.clear();
    for (const auto& c : j.at("palette"))
      s.palette.push_back({c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(), c.at(2).get<std::uint8_t>()});
  }
}

// Maps data values to pixel rows: affine, min tick at `bottom`, max tick at `top`.
struct AxisTransform {
  double v_min = 0, v_max = 1;
  double top = 0, bottom = 1;

  double to_pixel(double v) const { return bottom - (v - v_min) / (v_max - v_min) * (bottom - top); }
  double to_value(double py) const { return v_min + (bottom - py) / (bottom - top) * (v_max - v_min); }
};

class Canvas {
 public:
  Canvas(int w, int h, Rgb background = {255, 255, 255})
      : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < px_.size(); i += 3) {
      px_[i] = background.r;
      px_[i + 1] = background.g;
      px_[i + 2] = background.b;
    }
  }

  int width() const { return w_; }
  int height() const { return h_; }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  Rgb get(int x, int y) const {
    const auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    return {p[0], p[1], p[2]};
  }

  void fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) set(x, y, c);
  }

  void fill_circle(double cx, double cy, double radius, Rgb c) {
    const int x0 = static_cast<int>(std::floor(cx - radius)), x1 = static_cast<int>(std::ceil(cx + radius));
    const int y0 = static_cast<int>(std::floor(cy - radius)), y1 = static_cast<int>(std::ceil(cy + radius));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) set(x, y, c);
  }

  // Line with a round brush; thickness in pixels.
  void line(double x0, double y0, double x1, double y1, double thickness, Rgb c) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int i = 0; i <= steps; ++i) {
      const double f = static_cast<double>(i) / steps;
      fill_circle(x0 + (x1 - x0) * f, y0 + (y1 - y0) * f, thickness / 2, c);
    }
  }

  void text(int x, int y, std::string_view s, int scale, Rgb c) {
    int cx = x;
    for (char ch : s) {
      const auto rows = font::glyph_rows(ch);
      for (int r = 0; r < font::kGlyphHeight; ++r)
        for (int col = 0; col < font::kGlyphWidth; ++col)
          if (rows[static_cast<std::size_t>(r)] & (1u << (font::kGlyphWidth - 1 - col)))
            fill_rect(cx + col * scale, y + r * scale, cx + (col + 1) * scale - 1, y + (r + 1) * scale - 1, c);
      cx += font::kAdvance * scale;
    }
  }

  std::vector<std::uint8_t> encode_png() const { return png::encode_rgb(px_, w_, h_); }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

struct Rendered {
  std::vector<std::uint8_t> png;
  json meta;  // tick labels, plot geometry and data-point pixel positions
};

// Draws `table` against `axis` with the given chart type.  Cells must lie inside
// the tick range.  Used for benchmark items and for report plots.
inline Rendered render_chart(ChartType type, const DataTable& table, const AxisSpec& axis, const StyleSpec& style) {
  if (auto problems = validate_style(style); !problems.empty()) throw DomainError("invalid style: " + problems.front());
  if (axis.tick_values.size() < 2) throw RenderError("axis needs at least two ticks");
  if (table.rows() == 0 || table.cols() == 0) throw RenderError("empty table");
  if (table.cols() > style.palette.size()) throw RenderError("more entities than palette colours");

  const double v_min = axis.min_tick(), v_max = axis.max_tick();
  const double tol = 1e-9 * std::max(std::abs(v_min), std::abs(v_max));
  for (std::size_t r = 0; r < table.rows(); ++r)
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const Cell& cell = table.cells.at(r).at(c);
      if (!cell) throw RenderError("absent cell in table '" + table.id + "'");
      if (*cell < v_min - tol || *cell > v_max + tol)
        throw RenderError("cell value outside tick range in table '" + table.id + "'");
    }

  const int S = style.scale;
  const int fs = style.font_size * S;
  const int W = style.width * S, H = style.height * S;
  const int text_h = font::kGlyphHeight * fs;
  const Rgb ink{33, 33, 33}, grid{225, 225, 225}, spine{80, 80, 80};
  Canvas cv(W, H);

  std::vector<std::string> labels;
  for (double v : axis.tick_values) labels.push_back(format_tick(v, NumberFormat{axis.format}));
  int label_w = 0;
  for (const auto& l : labels) label_w = std::max(label_w, font::text_width(l, fs));

  // Legend rows above the plot.
  const int swatch = 10 * S, gap = 6 * S, item_gap = 18 * S, margin = 16 * S;
  std::vector<std::vector<std::size_t>> legend_rows(1);
  {
    int row_w = 0;
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const int w = swatch + gap + font::text_width(table.col_headers[c], fs);
      if (!legend_rows.back().empty() && row_w + item_gap + w > W - 2 * margin) {
        legend_rows.emplace_back();
        row_w = 0;
      }
      row_w += (legend_rows.back().empty() ? 0 : item_gap) + w;
      legend_rows.back().push_back(c);
    }
  }
  const int legend_line = text_h + 6 * S;
  const int legend_h = static_cast<int>(legend_rows.size()) * legend_line;

  const int left = margin + label_w + 10 * S;
  const int right = W - margin;
  const int top = margin + legend_h + 10 * S;
  const int bottom = H - margin - text_h - 10 * S;
  if (right - left < 40 * S || bottom - top < 40 * S) throw RenderError("canvas too small for labels");
  const AxisTransform tf{v_min, v_max, static_cast<double>(top), static_cast<double>(bottom)};

  json meta;
  meta["width"] = W;
  meta["height"] = H;
  meta["chart_type"] = std::string(to_string(type));
  meta["plot_area"] = {{"left", left}, {"top", top}, {"right", right}, {"bottom", bottom}};

  // Grid, ticks, labels.
  json ticks = json::array();
  for (std::size_t i = 0; i < axis.tick_values.size(); ++i) {
    const double py = tf.to_pixel(axis.tick_values[i]);
    const int iy = static_cast<int>(std::lround(py));
    if (style.grid) cv.fill_rect(left, iy, right, iy, grid);
    cv.fill_rect(left - 5 * S, iy, left, iy, spine);
    const int lw = font::text_width(labels[i], fs);
    cv.text(left - 8 * S - lw, iy - text_h / 2, labels[i], fs, ink);
    ticks.push_back({{"value", axis.tick_values[i]}, {"label", labels[i]}, {"pixel_y", py}});
  }
  meta["y_axis"] = {{"min", v_min}, {"max", v_max}, {"format", std::string(to_string(axis.format))}, {"ticks", ticks}};

  cv.fill_rect(left, top, left + S - 1, bottom, spine);
  cv.fill_rect(left, bottom, right, bottom + S - 1, spine);
  if (v_min < 0 && v_max > 0) {
    const int zy = static_cast<int>(std::lround(tf.to_pixel(0.0)));
    cv.fill_rect(left, zy, right, zy, spine);
  }

  // Categories.
  const std::size_t n_cat = table.rows(), n_ent = table.cols();
  const double slot = static_cast<double>(right - left) / static_cast<double>(n_cat);
  json xlabels = json::array();
  for (std::size_t r = 0; r < n_cat; ++r) {
    const double cx = left + slot * (static_cast<double>(r) + 0.5);
    const int lw = font::text_width(table.row_headers[r], fs);
    cv.text(static_cast<int>(std::lround(cx)) - lw / 2, bottom + 8 * S, table.row_headers[r], fs, ink);
    cv.fill_rect(static_cast<int>(std::lround(cx)), bottom, static_cast<int>(std::lround(cx)), bottom + 4 * S, spine);
    xlabels.push_back({{"label", table.row_headers[r]}, {"pixel_x", cx}});
  }
  meta["x_labels"] = xlabels;

  // Data.
  json points = json::array();
  const double baseline = std::clamp(0.0, v_min, v_max);
  const double group_w = slot * 0.8;
  const double bar_w = group_w / static_cast<double>(n_ent);
  for (std::size_t c = 0; c < n_ent; ++c) {
    const Rgb col = style.palette[c];
    double prev_x = 0, prev_y = 0;
    for (std::size_t r = 0; r < n_cat; ++r) {
      const double v = *table.cells[r][c];
      const double py = tf.to_pixel(v);
      double px = left + slot * (static_cast<double>(r) + 0.5);
      switch (type) {
        case ChartType::Line:
          if (r > 0) cv.line(prev_x, prev_y, px, py, 3.0 * S, col);
          break;
        case ChartType::Dot:
          cv.fill_circle(px, py, 5.0 * S, col);
          break;
        case ChartType::Bar: {
          const double x0 = px - group_w / 2 + bar_w * static_cast<double>(c);
          px = x0 + bar_w / 2;
          cv.fill_rect(static_cast<int>(std::lround(x0 + S)), static_cast<int>(std::lround(py)),
                       static_cast<int>(std::lround(x0 + bar_w - S)),
                       static_cast<int>(std::lround(tf.to_pixel(baseline))), col);
          break;
        }
      }
      points.push_back({{"row", r},
                        {"col", c},
                        {"category", table.row_headers[r]},
                        {"entity", table.col_headers[c]},
                        {"value", v},
                        {"pixel_x", px},
                        {"pixel_y", py}});
      prev_x = px;
      prev_y = py;
    }
  }
  meta["points"] = points;

  // Legend, centred per row.
  json legend = json::array();
  for (std::size_t lr = 0; lr < legend_rows.size(); ++lr) {
    int row_w = 0;
    for (std::size_t k = 0; k < legend_rows[lr].size(); ++k)
      row_w += (k ? item_gap : 0) + swatch + gap + font::text_width(table.col_headers[legend_rows[lr][k]], fs);
    int x = (W - row_w) / 2;
    const int y = margin + static_cast<int>(lr) * legend_line;
    for (std::size_t c : legend_rows[lr]) {
      cv.fill_rect(x, y + (text_h - swatch) / 2, x + swatch - 1, y + (text_h - swatch) / 2 + swatch - 1, style.palette[c]);
      cv.text(x + swatch + gap, y, table.col_headers[c], fs, ink);
      x += swatch + gap + font::text_width(table.col_headers[c], fs) + item_gap;
    }
  }
  for (const auto& h : table.col_headers) legend.push_back(h);
  meta["legend"] = legend;

  return {cv.encode_png(), std::move(meta)};
}

inline Rendered render(const BenchmarkItem& item, const DataTable& table, const StyleSpec& style) {
  Rendered out = render_chart(item.chart_type, table, item.axis, style);
  out.meta["schema_version"] = kSchemaVersion;
  out.meta["item_id"] = item.id;
  out.meta["table_id"] = item.table_id;
  return out;
}

namespace detail {
inline void write_atomically(const std::filesystem::path& path, const void* data, std::size_t size) {
  auto tmp = path;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "'");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}
}  // namespace detail

struct RenderOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  bool resume = false;   // skip items whose image and sidecar already exist
};

struct RenderReport {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::string>> failed;  // item id, reason
};

inline std::string image_file_name(const BenchmarkItem& item) { return item.id + ".png"; }

// Writes <id>.png and <id>.png.meta.json per item; image_ref of every item that
// ends up on disk is set to its file name relative to out_dir.
inline RenderReport render_manifest(Manifest& manifest, const StyleSpec& style, const std::filesystem::path& out_dir,
                                    RenderOptions opts = {}) {
  if (auto problems = validate_style(style); !problems.empty()) throw DomainError("invalid style: " + problems.front());
  std::filesystem::create_directories(out_dir);
  const std::size_t n = manifest.items.size();
  std::vector<int> status(n, 0);  // 1 written, 2 skipped, 3 failed
  std::vector<std::string> reasons(n);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& item = manifest.items[i];
      const auto png_path = out_dir / image_file_name(item);
      auto meta_path = png_path;
      meta_path += ".meta.json";
      try {
        if (opts.resume && std::filesystem::exists(png_path) && std::filesystem::exists(meta_path)) {
          status[i] = 2;
          continue;
        }
        Rendered r = render(item, manifest.table_for(item), style);
        r.meta["image"] = image_file_name(item);
        detail::write_atomically(png_path, r.png.data(), r.png.size());
        const std::string meta = r.meta.dump(1);
        detail::write_atomically(meta_path, meta.data(), meta.size());
        status[i] = 1;
      } catch (const std::exception& e) {
        status[i] = 3;
        reasons[i] = e.what();
      }
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  RenderReport report;
  for (std::size_t i = 0; i < n; ++i) {
    if (status[i] == 3) {
      report.failed.emplace_back(manifest.items[i].id, reasons[i]);
      continue;
    }
    status[i] == 1 ? ++report.written : ++report.skipped;
    manifest.items[i].image_ref = image_file_name(manifest.items[i]);
  }
  manifest.style = style;
  return report;
}

}  // namespace fc2t
