#include "gfte/scitsr.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gfte/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gfte {

namespace {

json parse_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

// White canvas with a dark block per cell bbox and a dark border — enough
// stroke/extent signal for the image branch without the source PDF.
Grayscale synthesize_image(const TableInstance& t) {
  const int w = std::max(2, static_cast<int>(std::lround(t.table_bbox.width())));
  const int h = std::max(2, static_cast<int>(std::lround(t.table_bbox.height())));
  Grayscale img(h, w);
  img.setConstant(1.0f);
  auto clampi = [](int v, int lo, int hi) { return std::min(std::max(v, lo), hi); };
  for (const auto& c : t.cells) {
    const int x0 = clampi(static_cast<int>(std::lround(c.bbox.x0 - t.table_bbox.x0)), 0, w - 1);
    const int x1 = clampi(static_cast<int>(std::lround(c.bbox.x1 - t.table_bbox.x0)), 0, w - 1);
    const int y0 = clampi(static_cast<int>(std::lround(c.bbox.y0 - t.table_bbox.y0)), 0, h - 1);
    const int y1 = clampi(static_cast<int>(std::lround(c.bbox.y1 - t.table_bbox.y0)), 0, h - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) img(y, x) = 0.25f;
  }
  img.row(0).setZero();
  img.row(h - 1).setZero();
  img.col(0).setZero();
  img.col(w - 1).setZero();
  return img;
}

}  // namespace

TableInstance load_scitsr_table(const std::string& structure_path, const std::string& chunk_path) {
  const json js = parse_file(structure_path);
  const json jc = parse_file(chunk_path);

  TableInstance t;
  t.source_id = fs::path(structure_path).stem().string();

  try {
    const auto& cells = js.at("cells");
    const auto& chunks = jc.at("chunks");
    if (!cells.is_array() || !chunks.is_array())
      throw DataError(structure_path + ": cells/chunks must be arrays");
    if (cells.size() != chunks.size())
      throw DataError(structure_path + ": " + std::to_string(cells.size()) + " cells vs " +
                      std::to_string(chunks.size()) + " chunks (faulty sample)");
    if (cells.empty()) throw DataError(structure_path + ": empty table");

    // Chunk boxes are PDF-style, y up; find the extent first so y can flip.
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& ch : chunks) {
      const auto& pos = ch.at("pos");
      if (!pos.is_array() || pos.size() != 4)
        throw DataError(chunk_path + ": pos must be [x1,x2,y1,y2]");
      xmin = std::min(xmin, pos[0].get<double>());
      xmax = std::max(xmax, pos[1].get<double>());
      ymin = std::min(ymin, pos[2].get<double>());
      ymax = std::max(ymax, pos[3].get<double>());
    }
    const double pad = 4.0;

    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& jcell = cells[i];
      const auto& pos = chunks[i].at("pos");
      Cell c;
      c.id = jcell.count("id") ? jcell.at("id").get<int>() : static_cast<int>(i);
      if (jcell.count("content")) {
        std::string text;
        for (const auto& tok : jcell.at("content")) {
          if (!text.empty()) text += " ";
          text += tok.get<std::string>();
        }
        c.text = text;
      }
      if (c.text.empty()) c.placeholder = true;
      c.row_start = jcell.at("start_row").get<int>();
      c.row_end = jcell.at("end_row").get<int>();
      c.col_start = jcell.at("start_col").get<int>();
      c.col_end = jcell.at("end_col").get<int>();
      c.bbox.x0 = pos[0].get<double>();
      c.bbox.x1 = pos[1].get<double>();
      c.bbox.y0 = ymax - pos[3].get<double>();  // flip: PDF top edge -> raster top
      c.bbox.y1 = ymax - pos[2].get<double>();
      c.bbox.y0 += pad;  // shift into the padded table box
      c.bbox.y1 += pad;
      c.bbox.x0 += pad - xmin;
      c.bbox.x1 += pad - xmin;
      t.n_rows = std::max(t.n_rows, c.row_end + 1);
      t.n_cols = std::max(t.n_cols, c.col_end + 1);
      t.cells.push_back(std::move(c));
    }
    t.table_bbox = {0.0, 0.0, (xmax - xmin) + 2 * pad, (ymax - ymin) + 2 * pad};
  } catch (const json::exception& e) {
    throw DataError(structure_path + ": " + e.what());
  }

  if (!t.table_bbox.positive_area())
    throw DataError(structure_path + ": degenerate chunk extent");
  t.image = synthesize_image(t);
  return t;
}

std::vector<TableInstance> load_scitsr_dir(const std::string& dir) {
  const fs::path sdir = fs::path(dir) / "structure";
  const fs::path cdir = fs::path(dir) / "chunk";
  if (!fs::is_directory(sdir) || !fs::is_directory(cdir))
    throw DataError(dir + ": expected structure/ and chunk/ subdirectories");

  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(sdir))
    if (entry.path().extension() == ".json") stems.push_back(entry.path().stem().string());
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw DataError(dir + ": no structure/*.json files");

  std::vector<TableInstance> tables;
  for (const auto& stem : stems) {
    const fs::path chunk = cdir / (stem + ".chunk");
    if (!fs::exists(chunk))
      throw DataError(dir + ": missing chunk file for " + stem);
    tables.push_back(load_scitsr_table((sdir / (stem + ".json")).string(), chunk.string()));
  }
  return tables;
}

}  // namespace gfte
