#pragma once

#include <string>
#include <vector>

#include "gfte/table.hpp"

namespace gfte {

// Adapter for the SciTSR layout: <dir>/structure/<id>.json holds cells with
// start/end row/col and token content, <dir>/chunk/<id>.chunk holds text
// chunks with pos = [x1, x2, y1, y2] in PDF coordinates (y up). Chunks map to
// cells by index, PDF y flips to the top-left-origin convention, and a
// stand-in raster is synthesized from the chunk boxes (the PDF page images are
// not part of the format).
TableInstance load_scitsr_table(const std::string& structure_path, const std::string& chunk_path);

// Pairs structure/*.json with chunk/<same stem>.chunk, sorted by stem.
std::vector<TableInstance> load_scitsr_dir(const std::string& dir);

}  // namespace gfte
