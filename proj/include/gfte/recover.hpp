#pragma once

#include <map>
#include <string>
#include <vector>

#include "gfte/cellgraph.hpp"
#include "gfte/table.hpp"

namespace gfte {

struct RecoveredCell {
  int cell_id = 0;
  int row_start = 0, row_end = 0;
  int col_start = 0, col_end = 0;
};

struct RecoveredStructure {
  std::vector<RecoveredCell> cells;  // ascending cell_id
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::string> diagnostics;  // conflicts and weak assignments, never fatal

  const RecoveredCell* find(int cell_id) const;
};

// Rebuilds grid indices and spans from labeled relations plus node geometry.
// Per axis (rows described, columns are the same with rel_cx):
//   1. flag span candidates: nodes whose same-row partners are not mutually
//      same-row (a spanning cell is exactly a node bridging several rows);
//   2. union-find over same-row edges among unflagged nodes gives the atomic
//      row components;
//   3. components ordered by mean rel_cy become row indices;
//   4. a flagged node spans [min,max] of its unflagged partners' indices;
//      flagged nodes with no unflagged partner fall back to the nearest
//      component by coordinate and are reported in diagnostics.
// Inconsistent (noisy) labels degrade into diagnostics, never exceptions.
RecoveredStructure recover_structure(const std::vector<NodeGeometry>& nodes,
                                     const std::vector<EdgeSample>& edges);

struct StructureScore {
  bool exact = false;
  double agreement = 0.0;  // fraction of cells whose four span indices match
};

StructureScore compare_structures(const RecoveredStructure& a, const TableInstance& b);

std::string structure_to_json(const RecoveredStructure& s);
// Grid exports; cell content comes from `texts` (cell id -> text) when given,
// otherwise cells print as #<id>.
std::string structure_to_csv(const RecoveredStructure& s,
                             const std::map<int, std::string>& texts = {});
std::string structure_to_html(const RecoveredStructure& s,
                              const std::map<int, std::string>& texts = {});

}  // namespace gfte
