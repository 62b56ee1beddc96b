#include "gfte/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gfte/error.hpp"
#include "gfte/image.hpp"
#include "gfte/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gfte {

namespace {

json bbox_to_json(const BBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

BBox bbox_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4)
    throw DataError(where + ": bbox must be [x0,y0,x1,y1]");
  BBox b;
  b.x0 = j[0].get<double>();
  b.y0 = j[1].get<double>();
  b.x1 = j[2].get<double>();
  b.y1 = j[3].get<double>();
  return b;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write " + path);
  os << content;
  if (!os) throw DataError("write failed for " + path);
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw DataError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

DatasetStats recount_stats(const std::vector<TableInstance>& tables) {
  DatasetStats s;
  s.tables = static_cast<std::int64_t>(tables.size());
  for (const auto& t : tables) {
    s.cells += static_cast<std::int64_t>(t.cells.size());
    bool any_merged = false;
    for (const auto& c : t.cells)
      if (!c.unit_span()) {
        ++s.merged_cells;
        any_merged = true;
      }
    if (any_merged) ++s.merged_tables;
  }
  return s;
}

void save_table_json(const TableInstance& t, const std::string& path) {
  json j;
  j["format_version"] = kDatasetFormatVersion;
  j["source_id"] = t.source_id;
  j["n_rows"] = t.n_rows;
  j["n_cols"] = t.n_cols;
  if (t.unit) j["unit"] = *t.unit;
  j["table_bbox"] = bbox_to_json(t.table_bbox);
  json cells = json::array();
  for (const auto& c : t.cells) {
    json jc;
    jc["id"] = c.id;
    jc["text"] = c.text;
    jc["bbox"] = bbox_to_json(c.bbox);
    jc["row"] = json::array({c.row_start, c.row_end});
    jc["col"] = json::array({c.col_start, c.col_end});
    if (c.placeholder) jc["placeholder"] = true;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  write_file(path, j.dump(2) + "\n");
}

TableInstance load_table_lenient(const std::string& json_path, const std::string& image_path) {
  json j;
  try {
    j = json::parse(read_file(json_path));
  } catch (const json::parse_error& e) {
    throw DataError(json_path + ": " + e.what());
  }

  TableInstance t;
  try {
    reject_unknown_keys(
        j, {"format_version", "source_id", "n_rows", "n_cols", "unit", "table_bbox", "cells"},
        json_path);
    const int version = j.at("format_version").get<int>();
    if (version != kDatasetFormatVersion)
      throw DataError(json_path + ": unsupported format_version " + std::to_string(version));
    t.source_id = j.at("source_id").get<std::string>();
    t.n_rows = j.at("n_rows").get<int>();
    t.n_cols = j.at("n_cols").get<int>();
    if (j.count("unit")) t.unit = j.at("unit").get<std::string>();
    t.table_bbox = bbox_from_json(j.at("table_bbox"), json_path + ": table_bbox");
    for (const auto& jc : j.at("cells")) {
      reject_unknown_keys(jc, {"id", "text", "bbox", "row", "col", "placeholder"},
                          json_path + ": cell");
      Cell c;
      c.id = jc.at("id").get<int>();
      c.text = jc.at("text").get<std::string>();
      c.bbox = bbox_from_json(jc.at("bbox"), json_path + ": cell bbox");
      const auto& row = jc.at("row");
      const auto& col = jc.at("col");
      if (!row.is_array() || row.size() != 2 || !col.is_array() || col.size() != 2)
        throw DataError(json_path + ": cell " + std::to_string(c.id) +
                        ": row/col must be [start,end]");
      c.row_start = row[0].get<int>();
      c.row_end = row[1].get<int>();
      c.col_start = col[0].get<int>();
      c.col_end = col[1].get<int>();
      if (jc.count("placeholder")) c.placeholder = jc.at("placeholder").get<bool>();
      t.cells.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw DataError(json_path + ": " + e.what());
  }

  t.image = read_pgm(image_path);
  return t;
}

TableInstance load_table(const std::string& json_path, const std::string& image_path) {
  TableInstance t = load_table_lenient(json_path, image_path);
  ValidationReport report = validate_table(t);
  if (!report.ok())
    throw DataError(json_path + ": invalid table: " + report.str());
  if (t.image.rows() < 2 || t.image.cols() < 2)
    throw DataError(image_path + ": image/annotation mismatch: degenerate raster " +
                    std::to_string(t.image.rows()) + "x" + std::to_string(t.image.cols()));
  const double img_aspect = static_cast<double>(t.image.cols()) / static_cast<double>(t.image.rows());
  const double box_aspect = t.table_bbox.width() / t.table_bbox.height();
  if (img_aspect > 4.0 * box_aspect || box_aspect > 4.0 * img_aspect)
    throw DataError(image_path + ": image/annotation mismatch: raster aspect " +
                    std::to_string(img_aspect) + " vs table_bbox aspect " +
                    std::to_string(box_aspect));
  return t;
}

DatasetManifest write_dataset(const std::vector<TableInstance>& tables, const std::string& dir,
                              const std::string& comment) {
  fs::create_directories(fs::path(dir) / "tables");
  fs::create_directories(fs::path(dir) / "images");

  DatasetManifest m;
  m.dir = dir;
  m.stats = recount_stats(tables);
  json jentries = json::array();
  for (const auto& t : tables) {
    ManifestEntry e;
    e.table_path = "tables/" + t.source_id + ".json";
    e.image_path = "images/" + t.source_id + ".pgm";
    save_table_json(t, (fs::path(dir) / e.table_path).string());
    write_pgm((fs::path(dir) / e.image_path).string(), t.image, comment);
    jentries.push_back({{"table", e.table_path}, {"image", e.image_path}});
    m.entries.push_back(std::move(e));
  }

  json j;
  j["format_version"] = kDatasetFormatVersion;
  j["entries"] = jentries;
  j["stats"] = {{"tables", m.stats.tables},
                {"cells", m.stats.cells},
                {"merged_cells", m.stats.merged_cells},
                {"merged_tables", m.stats.merged_tables}};
  write_file((fs::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
  return m;
}

DatasetManifest read_manifest(const std::string& dir) {
  const std::string mpath = (fs::path(dir) / "manifest.json").string();
  json j;
  try {
    j = json::parse(read_file(mpath));
  } catch (const json::parse_error& e) {
    throw DataError(mpath + ": " + e.what());
  }

  DatasetManifest m;
  m.dir = dir;
  try {
    reject_unknown_keys(j, {"format_version", "entries", "stats"}, mpath);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion)
      throw DataError(mpath + ": unsupported format_version " +
                      std::to_string(m.format_version));
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.table_path = je.at("table").get<std::string>();
      e.image_path = je.at("image").get<std::string>();
      m.entries.push_back(std::move(e));
    }
    const auto& s = j.at("stats");
    m.stats.tables = s.at("tables").get<std::int64_t>();
    m.stats.cells = s.at("cells").get<std::int64_t>();
    m.stats.merged_cells = s.at("merged_cells").get<std::int64_t>();
    m.stats.merged_tables = s.at("merged_tables").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw DataError(mpath + ": " + e.what());
  }

  for (const auto& e : m.entries) {
    for (const std::string& rel : {e.table_path, e.image_path})
      if (!fs::exists(fs::path(dir) / rel))
        throw DataError(mpath + ": referenced file missing: " + rel);
  }
  return m;
}

std::vector<TableInstance> load_dataset(const DatasetManifest& m) {
  std::vector<TableInstance> tables;
  tables.reserve(m.entries.size());
  for (const auto& e : m.entries)
    tables.push_back(load_table((fs::path(m.dir) / e.table_path).string(),
                                (fs::path(m.dir) / e.image_path).string()));
  const DatasetStats fresh = recount_stats(tables);
  if (fresh.tables != m.stats.tables || fresh.cells != m.stats.cells ||
      fresh.merged_cells != m.stats.merged_cells || fresh.merged_tables != m.stats.merged_tables)
    throw DataError(m.dir + "/manifest.json: stats do not match a recount of the entries");
  return tables;
}

FilterResult filter_dataset(const DatasetManifest& m) {
  FilterResult result;
  result.accepted.dir = m.dir;
  result.accepted.format_version = m.format_version;

  for (const auto& e : m.entries) {
    TableInstance t;
    try {
      t = load_table_lenient((fs::path(m.dir) / e.table_path).string(),
                             (fs::path(m.dir) / e.image_path).string());
    } catch (const Error& err) {
      result.rejected.push_back({e, std::string("IO: ") + err.what()});
      continue;
    }

    std::string reason;
    if (t.n_rows < 1 || t.n_cols < 1) {
      reason = "F5: grid dimension " + std::to_string(t.n_rows) + "x" + std::to_string(t.n_cols);
    } else if (t.cells.size() < 2) {
      reason = "F4: fewer than 2 cells";
    } else {
      ValidationReport report = validate_table(t);
      if (report.has(ViolationKind::DuplicateId))
        reason = "F3: duplicate cell ids";
      else if (report.has(ViolationKind::BadBBox))
        reason = "F2: cell bbox with non-positive area";
      else if (!report.ok())
        reason = "F1: " + report.str();
    }

    if (reason.empty()) {
      result.accepted.entries.push_back(e);
      result.tables.push_back(std::move(t));
    } else {
      result.rejected.push_back({e, reason});
    }
  }

  result.accepted.stats = recount_stats(result.tables);
  return result;
}

std::string dataset_fingerprint(const DatasetManifest& m) {
  std::uint64_t h = fnv1a64("gfte-dataset");
  for (const auto& e : m.entries) {
    h = fnv1a64(e.table_path, h);
    h = fnv1a64(read_file((fs::path(m.dir) / e.table_path).string()), h);
    h = fnv1a64(read_file((fs::path(m.dir) / e.image_path).string()), h);
  }
  return to_hex(h);
}

}  // namespace gfte
