#include "gfte/table.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "gfte/error.hpp"

namespace gfte {

const Cell* TableInstance::find_cell(int id) const {
  for (const auto& c : cells)
    if (c.id == id) return &c;
  return nullptr;
}

EdgeSample EdgeSample::canonical(int a, int b, bool h, bool v) {
  if (a == b) throw UsageError("edge endpoints must be distinct, got id " + std::to_string(a));
  EdgeSample e;
  e.src = std::min(a, b);
  e.dst = std::max(a, b);
  e.label_h = h;
  e.label_v = v;
  return e;
}

bool ValidationReport::has(ViolationKind k) const {
  return std::any_of(violations.begin(), violations.end(),
                     [k](const Violation& v) { return v.kind == k; });
}

std::string ValidationReport::str() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.detail;
    if (&v != &violations.back()) os << "; ";
  }
  return os.str();
}

namespace {

std::string ids_str(const std::vector<int>& ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
  return os.str();
}

void add(ValidationReport& r, ViolationKind k, std::vector<int> ids, std::string detail) {
  r.violations.push_back({k, std::move(ids), std::move(detail)});
}

}  // namespace

ValidationReport validate_table(const TableInstance& t) {
  ValidationReport rep;

  if (t.n_rows < 1 || t.n_cols < 1)
    add(rep, ViolationKind::BadGrid, {},
        "grid dimensions must be positive, got " + std::to_string(t.n_rows) + "x" +
            std::to_string(t.n_cols));
  if (!t.table_bbox.positive_area())
    add(rep, ViolationKind::BadGrid, {}, "table_bbox has non-positive area");

  std::map<int, int> id_count;
  for (const auto& c : t.cells) ++id_count[c.id];
  for (const auto& [id, n] : id_count)
    if (n > 1)
      add(rep, ViolationKind::DuplicateId, {id},
          "cell id " + std::to_string(id) + " appears " + std::to_string(n) + " times");

  for (const auto& c : t.cells) {
    if (!c.bbox.positive_area())
      add(rep, ViolationKind::BadBBox, {c.id},
          "cell " + std::to_string(c.id) + " bbox has non-positive area or non-finite coords");
    else if (t.table_bbox.positive_area() && !t.table_bbox.contains(c.bbox))
      add(rep, ViolationKind::BBoxOutsideTable, {c.id},
          "cell " + std::to_string(c.id) + " bbox lies outside table_bbox");

    if (c.row_start > c.row_end || c.col_start > c.col_end)
      add(rep, ViolationKind::BadSpanOrder, {c.id},
          "cell " + std::to_string(c.id) + " has inverted span interval");
    else if (c.row_start < 0 || c.col_start < 0 || c.row_end >= t.n_rows || c.col_end >= t.n_cols)
      add(rep, ViolationKind::SpanOutOfGrid, {c.id},
          "cell " + std::to_string(c.id) + " span exceeds the " + std::to_string(t.n_rows) + "x" +
              std::to_string(t.n_cols) + " grid");

    if (c.text.empty() && !c.placeholder)
      add(rep, ViolationKind::EmptyText, {c.id},
          "cell " + std::to_string(c.id) + " has empty text but is not a placeholder");
  }

  // Pairwise span disjointness via an occupancy grid; reports both offenders.
  if (t.n_rows >= 1 && t.n_cols >= 1) {
    std::vector<int> occupancy(static_cast<std::size_t>(t.n_rows) * t.n_cols, -1);
    for (const auto& c : t.cells) {
      if (c.row_start > c.row_end || c.col_start > c.col_end) continue;
      if (c.row_start < 0 || c.col_start < 0 || c.row_end >= t.n_rows || c.col_end >= t.n_cols)
        continue;
      for (int r = c.row_start; r <= c.row_end; ++r) {
        for (int col = c.col_start; col <= c.col_end; ++col) {
          int& slot = occupancy[static_cast<std::size_t>(r) * t.n_cols + col];
          if (slot >= 0 && slot != c.id) {
            std::vector<int> pair = {slot, c.id};
            add(rep, ViolationKind::SpanOverlap, pair,
                "cells " + ids_str(pair) + " overlap at grid (" + std::to_string(r) + "," +
                    std::to_string(col) + ")");
            goto next_cell;  // one report per offending pair is enough
          }
          slot = c.id;
        }
      }
    next_cell:;
    }
  }

  return rep;
}

std::pair<bool, bool> ground_truth_relation(const Cell& a, const Cell& b) {
  if (a.id == b.id)
    throw UsageError("ground_truth_relation requires distinct cells, got id " +
                     std::to_string(a.id) + " twice");
  const bool h = a.row_start <= b.row_end && b.row_start <= a.row_end;
  const bool v = a.col_start <= b.col_end && b.col_start <= a.col_end;
  return {h, v};
}

}  // namespace gfte
