#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfte/geometry.hpp"
#include "gfte/image.hpp"

namespace gfte {

// Grid spans are inclusive integer intervals. "Same row" for spanning cells is
// interval intersection, the only definition consistent with merged-cell tables.
struct Cell {
  int id = 0;
  std::string text;
  BBox bbox;
  int row_start = 0;
  int row_end = 0;
  int col_start = 0;
  int col_end = 0;
  bool placeholder = false;  // permits empty text for structural empties

  bool row_unit() const { return row_start == row_end; }
  bool col_unit() const { return col_start == col_end; }
  bool unit_span() const { return row_unit() && col_unit(); }
};

struct TableInstance {
  std::vector<Cell> cells;
  Grayscale image;  // raster of exactly the table_bbox region
  BBox table_bbox;
  int n_rows = 0;
  int n_cols = 0;
  std::optional<std::string> unit;  // monetary/scale unit, preserved verbatim
  std::string source_id;

  const Cell* find_cell(int id) const;
};

enum class RelationKind { SameRow, SameCol, Unrelated };

// Canonical undirected labeled edge: src < dst always.
struct EdgeSample {
  int src = 0;
  int dst = 0;
  bool label_h = false;  // same row
  bool label_v = false;  // same column

  static EdgeSample canonical(int a, int b, bool h = false, bool v = false);
};

inline bool operator==(const EdgeSample& a, const EdgeSample& b) {
  return a.src == b.src && a.dst == b.dst && a.label_h == b.label_h && a.label_v == b.label_v;
}

enum class ViolationKind {
  BadBBox,           // non-finite or non-positive-area cell bbox
  BadSpanOrder,      // row_start > row_end or col_start > col_end
  SpanOutOfGrid,     // span rectangle outside [0,n_rows) x [0,n_cols)
  SpanOverlap,       // two cells' span rectangles intersect
  BBoxOutsideTable,  // cell bbox not contained in table_bbox
  EmptyText,         // empty text on a non-placeholder cell
  DuplicateId,
  BadGrid,  // n_rows or n_cols < 1, or bad table_bbox
};

struct Violation {
  ViolationKind kind;
  std::vector<int> cell_ids;  // offending cells, when applicable
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const;
  std::string str() const;
};

// Returns every invariant violation with the offending cell ids. Violations are
// data, not failures; an empty report means the table is valid.
ValidationReport validate_table(const TableInstance& t);

// (label_h, label_v) by inclusive-interval intersection on row/col spans.
// Symmetric in (a, b). Throws UsageError when a.id == b.id.
std::pair<bool, bool> ground_truth_relation(const Cell& a, const Cell& b);

}  // namespace gfte
