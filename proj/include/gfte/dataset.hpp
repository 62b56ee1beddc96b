#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gfte/table.hpp"

namespace gfte {

inline constexpr int kDatasetFormatVersion = 1;

// Paths are relative to the dataset directory (the layout is
// manifest.json + tables/<id>.json + images/<id>.pgm).
struct ManifestEntry {
  std::string table_path;
  std::string image_path;
};

struct DatasetStats {
  std::int64_t tables = 0;
  std::int64_t cells = 0;
  std::int64_t merged_cells = 0;   // cells spanning more than one grid position
  std::int64_t merged_tables = 0;  // tables containing at least one such cell
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  std::string dir;  // directory the manifest was read from / written to
  std::vector<ManifestEntry> entries;
  DatasetStats stats;
};

DatasetStats recount_stats(const std::vector<TableInstance>& tables);

// One table per JSON file. Round-trips every field; reals survive exactly
// (shortest-round-trip double formatting).
void save_table_json(const TableInstance& t, const std::string& path);

// Schema parse only — no invariant checking. The filter pipeline needs to see
// broken tables instead of throwing on them.
TableInstance load_table_lenient(const std::string& json_path, const std::string& image_path);

// Strict load: lenient load + validate_table + image/annotation sanity. The
// image check is deliberately loose (degenerate raster or a grossly wrong
// aspect ratio), so differently scaled-but-matching rasters pass.
TableInstance load_table(const std::string& json_path, const std::string& image_path);

// Writes manifest + tables/ + images/ under dir. The comment line is embedded
// in every PGM header (carries the generation fingerprint).
DatasetManifest write_dataset(const std::vector<TableInstance>& tables, const std::string& dir,
                              const std::string& comment = "");

// Reads manifest.json and checks every referenced file exists.
DatasetManifest read_manifest(const std::string& dir);

// Strict load of every entry; recounts stats against the manifest.
std::vector<TableInstance> load_dataset(const DatasetManifest& m);

struct RejectedEntry {
  ManifestEntry entry;
  std::string reason;  // "F1".."F5" filter code or "IO", plus detail
};

struct FilterResult {
  DatasetManifest accepted;
  std::vector<RejectedEntry> rejected;
  std::vector<TableInstance> tables;  // the accepted tables, loaded
};

// Rejects entries failing any of: F1 validate_table violations, F2 non-positive
// bbox area, F3 duplicate cell ids, F4 fewer than 2 cells, F5 zero grid
// dimension. Unreadable entries are rejected with an IO reason, never aborting
// the batch. accepted + rejected partition the input.
FilterResult filter_dataset(const DatasetManifest& m);

// Order-dependent content hash over all table JSON and image bytes; reports
// embed it so every number traces back to its inputs.
std::string dataset_fingerprint(const DatasetManifest& m);

}  // namespace gfte
