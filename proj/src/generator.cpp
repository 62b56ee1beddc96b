#include "gfte/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gfte/error.hpp"
#include "gfte/rng.hpp"
#include "gfte/vocab.hpp"

using nlohmann::json;

namespace gfte {

namespace {

// Pseudo-glyph metrics: 3x5 dark blocks with 1-px gaps, so a string of n
// characters occupies 4n-1 x 5 pixels. Legibility is a non-goal; extent and
// stroke density are what the image branch consumes.
constexpr int kGlyphW = 3;
constexpr int kGlyphH = 5;
constexpr int kGlyphStride = kGlyphW + 1;
constexpr int kMargin = 4;  // table_bbox inset around the grid
constexpr int kCellPad = 3; // grid line to text region
constexpr double kPlaceholderProb = 0.04;
constexpr double kUnitProb = 0.3;

int text_width(int n_chars) { return kGlyphStride * n_chars - 1; }

enum class Align { Left, Right, Center };

struct SpanRect {
  int r0, r1, c0, c1;
};

}  // namespace

void GenSpec::validate() const {
  if (n_tables < 1) throw UsageError("gen spec: n_tables must be >= 1");
  if (rows_min < 1 || rows_min > rows_max)
    throw UsageError("gen spec: rows range [" + std::to_string(rows_min) + "," +
                     std::to_string(rows_max) + "] is empty or non-positive");
  if (cols_min < 1 || cols_min > cols_max)
    throw UsageError("gen spec: cols range [" + std::to_string(cols_min) + "," +
                     std::to_string(cols_max) + "] is empty or non-positive");
  for (double p : {merge_probability, dropped_line_probability})
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("gen spec: probabilities must lie in [0,1]");
  if (align_left < 0 || align_right < 0 || align_center < 0 ||
      align_left + align_right + align_center <= 0)
    throw UsageError("gen spec: alignment_mix weights must be non-negative with positive sum");
  if (utf8_decode(text_alphabet).size() < 2)
    throw UsageError("gen spec: text_alphabet needs at least 2 characters");
}

std::string GenSpec::to_json() const {
  json j;
  j["n_tables"] = n_tables;
  j["rows"] = json::array({rows_min, rows_max});
  j["cols"] = json::array({cols_min, cols_max});
  j["merge_probability"] = merge_probability;
  j["dropped_line_probability"] = dropped_line_probability;
  j["alignment_mix"] = {{"left", align_left}, {"right", align_right}, {"center", align_center}};
  j["seed"] = seed;
  j["text_alphabet"] = text_alphabet;
  return j.dump();
}

GenSpec GenSpec::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("gen spec: ") + e.what());
  }

  GenSpec s;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "n_tables") {
        s.n_tables = it->get<int>();
      } else if (key == "rows" || key == "cols") {
        if (!it->is_array() || it->size() != 2)
          throw UsageError("gen spec: " + key + " must be [min,max]");
        (key == "rows" ? s.rows_min : s.cols_min) = (*it)[0].get<int>();
        (key == "rows" ? s.rows_max : s.cols_max) = (*it)[1].get<int>();
      } else if (key == "merge_probability") {
        s.merge_probability = it->get<double>();
      } else if (key == "dropped_line_probability") {
        s.dropped_line_probability = it->get<double>();
      } else if (key == "alignment_mix") {
        for (auto a = it->begin(); a != it->end(); ++a) {
          if (a.key() == "left") s.align_left = a->get<double>();
          else if (a.key() == "right") s.align_right = a->get<double>();
          else if (a.key() == "center") s.align_center = a->get<double>();
          else throw UsageError("gen spec: unknown alignment_mix key '" + a.key() + "'");
        }
      } else if (key == "seed") {
        s.seed = it->get<std::uint64_t>();
      } else if (key == "text_alphabet") {
        s.text_alphabet = it->get<std::string>();
      } else {
        throw UsageError("gen spec: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("gen spec: ") + e.what());
  }
  s.validate();
  return s;
}

GenSpec GenSpec::from_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("gen spec: cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return from_json(os.str());
}

std::string GenSpec::fingerprint() const { return to_hex(fnv1a64(to_json())); }

TableInstance generate_table(const GenSpec& spec, int index) {
  spec.validate();
  Rng rng = Rng(spec.seed).substream("gen/table/" + std::to_string(index));

  TableInstance t;
  {
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%05d", index);
    t.source_id = buf;
  }

  const int rows = static_cast<int>(rng.uniform_int(spec.rows_min, spec.rows_max));
  const int cols = static_cast<int>(rng.uniform_int(spec.cols_min, spec.cols_max));
  t.n_rows = rows;
  t.n_cols = cols;

  // Merge proposals keep the invariant the recover module depends on: every
  // row and every column retains at least one unit-span cell. Infeasible
  // proposals are simply retried, so the merged-table fraction tracks
  // merge_probability minus a tiny feasibility shortfall.
  std::vector<SpanRect> merges;
  std::vector<char> covered(static_cast<std::size_t>(rows * cols), 0);
  std::vector<int> merged_in_row(static_cast<std::size_t>(rows), 0);
  std::vector<int> merged_in_col(static_cast<std::size_t>(cols), 0);
  if (rng.bernoulli(spec.merge_probability)) {
    const int attempts = static_cast<int>(rng.uniform_int(1, 2));
    for (int a = 0; a < attempts; ++a) {
      for (int retry = 0; retry < 8; ++retry) {
        const int r0 = static_cast<int>(rng.uniform_int(0, rows - 1));
        const int c0 = static_cast<int>(rng.uniform_int(0, cols - 1));
        const int h = static_cast<int>(rng.uniform_int(1, std::min(2, rows - r0)));
        const int w = static_cast<int>(rng.uniform_int(1, std::min(3, cols - c0)));
        if (h * w == 1) continue;

        bool free = true;
        for (int r = r0; r < r0 + h && free; ++r)
          for (int c = c0; c < c0 + w && free; ++c)
            if (covered[static_cast<std::size_t>(r * cols + c)]) free = false;
        if (!free) continue;

        bool keeps_units = true;
        for (int r = r0; r < r0 + h && keeps_units; ++r)
          if (cols - merged_in_row[static_cast<std::size_t>(r)] - w < 1) keeps_units = false;
        for (int c = c0; c < c0 + w && keeps_units; ++c)
          if (rows - merged_in_col[static_cast<std::size_t>(c)] - h < 1) keeps_units = false;
        if (!keeps_units) continue;

        merges.push_back({r0, r0 + h - 1, c0, c0 + w - 1});
        for (int r = r0; r < r0 + h; ++r)
          for (int c = c0; c < c0 + w; ++c) {
            covered[static_cast<std::size_t>(r * cols + c)] = 1;
            ++merged_in_row[static_cast<std::size_t>(r)];
            ++merged_in_col[static_cast<std::size_t>(c)];
          }
        break;
      }
    }
  }

  // Integer geometry throughout, so rasterization is exact. Column 0 is wide
  // and left-aligned (long first columns are the classic horizontal-sparsity
  // trap); the rest lean numeric.
  std::vector<int> xs(static_cast<std::size_t>(cols) + 1), ys(static_cast<std::size_t>(rows) + 1);
  xs[0] = kMargin;
  for (int c = 0; c < cols; ++c) {
    const int w = static_cast<int>(c == 0 ? rng.uniform_int(100, 140) : rng.uniform_int(45, 80));
    xs[static_cast<std::size_t>(c) + 1] = xs[static_cast<std::size_t>(c)] + w;
  }
  ys[0] = kMargin;
  for (int r = 0; r < rows; ++r) {
    const int h = static_cast<int>(rng.uniform_int(16, 26));
    ys[static_cast<std::size_t>(r) + 1] = ys[static_cast<std::size_t>(r)] + h;
  }
  t.table_bbox = {0.0, 0.0, static_cast<double>(xs.back() + kMargin),
                  static_cast<double>(ys.back() + kMargin)};

  std::vector<Align> col_align(static_cast<std::size_t>(cols), Align::Left);
  const double wsum = spec.align_left + spec.align_right + spec.align_center;
  for (int c = 1; c < cols; ++c) {
    const double u = rng.uniform() * wsum;
    col_align[static_cast<std::size_t>(c)] =
        u < spec.align_left ? Align::Left
                            : (u < spec.align_left + spec.align_right ? Align::Right : Align::Center);
  }

  // Owner map: -1 for a pending unit cell, otherwise an index into merges.
  std::vector<int> owner(static_cast<std::size_t>(rows * cols), -1);
  for (std::size_t m = 0; m < merges.size(); ++m)
    for (int r = merges[m].r0; r <= merges[m].r1; ++r)
      for (int c = merges[m].c0; c <= merges[m].c1; ++c)
        owner[static_cast<std::size_t>(r * cols + c)] = static_cast<int>(m);

  const std::vector<char32_t> alphabet = utf8_decode(spec.text_alphabet);
  const int asz = static_cast<int>(alphabet.size());

  int next_id = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      SpanRect span{r, r, c, c};
      const int m = owner[static_cast<std::size_t>(r * cols + c)];
      if (m >= 0) {
        span = merges[static_cast<std::size_t>(m)];
        if (span.r0 != r || span.c0 != c) continue;  // emitted at its top-left corner
      }

      Cell cell;
      cell.id = next_id++;
      cell.row_start = span.r0;
      cell.row_end = span.r1;
      cell.col_start = span.c0;
      cell.col_end = span.c1;

      const int rx0 = xs[static_cast<std::size_t>(span.c0)] + kCellPad;
      const int rx1 = xs[static_cast<std::size_t>(span.c1) + 1] - kCellPad;
      const int ry0 = ys[static_cast<std::size_t>(span.r0)] + kCellPad;
      const int ry1 = ys[static_cast<std::size_t>(span.r1) + 1] - kCellPad;

      if (rng.bernoulli(kPlaceholderProb)) {
        cell.placeholder = true;
        const int cx = (rx0 + rx1) / 2, cy = (ry0 + ry1) / 2;
        cell.bbox = {static_cast<double>(cx - 3), static_cast<double>(cy - 2),
                     static_cast<double>(cx + 4), static_cast<double>(cy + 3)};
      } else {
        const int max_chars = std::min(20, (rx1 - rx0 + 1) / kGlyphStride);
        const int desired = static_cast<int>(span.c0 == 0 ? rng.uniform_int(6, 14)
                                                          : rng.uniform_int(2, 9));
        const int len = std::max(2, std::min(desired, max_chars));

        // Body is random; the first character tags the row and the last tags
        // the column, giving text a consistent same-row/same-column signal.
        std::vector<char32_t> cps(static_cast<std::size_t>(len));
        for (auto& cp : cps) cp = alphabet[static_cast<std::size_t>(rng.uniform_int(0, asz - 1))];
        cps.front() = alphabet[static_cast<std::size_t>(span.r0 % asz)];
        cps.back() = alphabet[static_cast<std::size_t>(asz - 1 - span.c0 % asz)];
        cell.text = utf8_encode(cps);

        const int tw = text_width(len);
        int bx0 = rx0;
        switch (col_align[static_cast<std::size_t>(span.c0)]) {
          case Align::Left: bx0 = rx0; break;
          case Align::Right: bx0 = rx1 - tw; break;
          case Align::Center: bx0 = rx0 + (rx1 - rx0 - tw) / 2; break;
        }
        const int by0 = ry0 + (ry1 - ry0 - kGlyphH) / 2;
        cell.bbox = {static_cast<double>(bx0), static_cast<double>(by0),
                     static_cast<double>(bx0 + tw), static_cast<double>(by0 + kGlyphH)};
      }
      t.cells.push_back(std::move(cell));
    }
  }

  if (rng.bernoulli(kUnitProb)) {
    static const char* kUnits[] = {"万元", "%", "千元"};
    t.unit = kUnits[rng.uniform_int(0, 2)];
  }

  t.image = rasterize(t, spec);
  return t;
}

std::vector<TableInstance> generate_tables(const GenSpec& spec) {
  spec.validate();
  std::vector<TableInstance> tables;
  tables.reserve(static_cast<std::size_t>(spec.n_tables));
  for (int i = 0; i < spec.n_tables; ++i) tables.push_back(generate_table(spec, i));
  return tables;
}

Grayscale rasterize(const TableInstance& t, const GenSpec& spec) {
  if (!t.table_bbox.positive_area())
    throw DataError("rasterize: table " + t.source_id + " has a zero-area table_bbox");
  const int w = std::max(2, static_cast<int>(std::lround(t.table_bbox.width())));
  const int h = std::max(2, static_cast<int>(std::lround(t.table_bbox.height())));
  Grayscale img(h, w);
  img.setConstant(1.0f);

  Rng rng = Rng(spec.seed).substream("raster/" + t.source_id);

  // Grid boundaries derived from the text bboxes alone, so this works on any
  // valid table, not just freshly generated ones: the line between two
  // adjacent columns sits midway between the rightmost text ending in the
  // left column and the leftmost text starting in the right one.
  auto boundary = [&](int n, bool is_col) {
    std::vector<int> b(static_cast<std::size_t>(n) + 1, -1);
    b[0] = 0;
    b[static_cast<std::size_t>(n)] = (is_col ? w : h) - 1;
    for (int i = 1; i < n; ++i) {
      double hi = -1e300, lo = 1e300;
      for (const auto& c : t.cells) {
        const int cell_end = is_col ? c.col_end : c.row_end;
        const int cell_start = is_col ? c.col_start : c.row_start;
        const double far_edge = is_col ? c.bbox.x1 - t.table_bbox.x0 : c.bbox.y1 - t.table_bbox.y0;
        const double near_edge = is_col ? c.bbox.x0 - t.table_bbox.x0 : c.bbox.y0 - t.table_bbox.y0;
        if (cell_end == i - 1) hi = std::max(hi, far_edge);
        if (cell_start == i) lo = std::min(lo, near_edge);
      }
      if (hi > -1e300 && lo < 1e300)
        b[static_cast<std::size_t>(i)] =
            std::clamp(static_cast<int>(std::lround(0.5 * (hi + lo))), 0, (is_col ? w : h) - 1);
    }
    return b;
  };
  const std::vector<int> xb = boundary(t.n_cols, true);
  const std::vector<int> yb = boundary(t.n_rows, false);

  // Span occupancy, for skipping rule segments through merged cells.
  std::vector<int> owner(static_cast<std::size_t>(t.n_rows * t.n_cols), -1);
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    const Cell& c = t.cells[i];
    for (int r = c.row_start; r <= c.row_end && r < t.n_rows; ++r)
      for (int cc = c.col_start; cc <= c.col_end && cc < t.n_cols; ++cc)
        if (r >= 0 && cc >= 0) owner[static_cast<std::size_t>(r * t.n_cols + cc)] = static_cast<int>(i);
  }
  auto own = [&](int r, int c) { return owner[static_cast<std::size_t>(r * t.n_cols + c)]; };

  auto hline = [&](int y, int x0, int x1) {
    if (y < 0 || y >= h) return;
    for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) img(y, x) = 0.0f;
  };
  auto vline = [&](int x, int y0, int y1) {
    if (x < 0 || x >= w) return;
    for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y) img(y, x) = 0.0f;
  };

  // Interior rules first (each full line gets one drop decision), border last.
  for (int r = 1; r < t.n_rows; ++r) {
    if (yb[static_cast<std::size_t>(r)] < 0) continue;
    const bool drop = rng.bernoulli(spec.dropped_line_probability);
    if (drop) continue;
    for (int c = 0; c < t.n_cols; ++c)
      if (own(r - 1, c) != own(r, c) || own(r, c) < 0)
        hline(yb[static_cast<std::size_t>(r)], xb[static_cast<std::size_t>(c)],
              xb[static_cast<std::size_t>(c) + 1]);
  }
  for (int c = 1; c < t.n_cols; ++c) {
    if (xb[static_cast<std::size_t>(c)] < 0) continue;
    const bool drop = rng.bernoulli(spec.dropped_line_probability);
    if (drop) continue;
    for (int r = 0; r < t.n_rows; ++r)
      if (own(r, c - 1) != own(r, c) || own(r, c) < 0)
        vline(xb[static_cast<std::size_t>(c)], yb[static_cast<std::size_t>(r)],
              yb[static_cast<std::size_t>(r) + 1]);
  }
  hline(0, 0, w - 1);
  hline(h - 1, 0, w - 1);
  vline(0, 0, h - 1);
  vline(w - 1, 0, h - 1);

  // Pseudo-glyphs: one shaded block per character, shade keyed to the
  // character, so different texts leave different ink.
  for (const auto& c : t.cells) {
    const std::vector<char32_t> cps = utf8_decode(c.text);
    const int gx = static_cast<int>(std::lround(c.bbox.x0 - t.table_bbox.x0));
    const int gy = static_cast<int>(std::lround(c.bbox.y0 - t.table_bbox.y0));
    for (std::size_t k = 0; k < cps.size(); ++k) {
      const float shade =
          0.45f * static_cast<float>((static_cast<std::uint32_t>(cps[k]) * 2654435761u) % 8u) / 8.0f;
      for (int dy = 0; dy < kGlyphH; ++dy)
        for (int dx = 0; dx < kGlyphW; ++dx) {
          const int x = gx + static_cast<int>(k) * kGlyphStride + dx;
          const int y = gy + dy;
          if (x >= 0 && x < w && y >= 0 && y < h) img(y, x) = shade;
        }
    }
  }
  return img;
}

}  // namespace gfte
