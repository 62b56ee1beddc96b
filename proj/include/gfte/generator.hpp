#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfte/image.hpp"
#include "gfte/table.hpp"

namespace gfte {

// Knobs of the synthetic corpus. Everything downstream of `seed` is pinned:
// the same spec produces byte-identical tables and rasters on any platform.
struct GenSpec {
  int n_tables = 100;
  int rows_min = 3, rows_max = 8;
  int cols_min = 3, cols_max = 6;
  double merge_probability = 0.3;         // fraction of tables attempting a merge
  double dropped_line_probability = 0.2;  // per interior rule line
  double align_left = 0.25, align_right = 0.5, align_center = 0.25;
  std::uint64_t seed = 1;
  std::string text_alphabet = "0123456789.%-abcdefghijklmnopqrstuvwxyz";

  void validate() const;
  std::string to_json() const;
  static GenSpec from_json(const std::string& json_text);
  static GenSpec from_file(const std::string& path);
  std::string fingerprint() const;
};

// One table, fully deterministic in (spec.seed, index). Structure guarantees:
// passes validate_table; every row and every column contains at least one
// unit-span cell; merges are axis-aligned rectangles of previously-unit cells.
// The raster image is attached.
TableInstance generate_table(const GenSpec& spec, int index);

std::vector<TableInstance> generate_tables(const GenSpec& spec);

// Standalone rasterizer: rule lines along grid boundaries derived from the
// cell bboxes, interior lines dropped per spec, text as pseudo-glyph blocks.
// Randomness comes from the substream (spec.seed, "raster/" + source_id), so
// re-rasterizing a loaded table reproduces its image.
Grayscale rasterize(const TableInstance& t, const GenSpec& spec);

}  // namespace gfte
