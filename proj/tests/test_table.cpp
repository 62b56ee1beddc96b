#include <doctest.h>

#include "gfte/error.hpp"

#include "gfte/table.hpp"

#include "helpers.hpp"

using namespace gfte;
using testutil::cell;

TEST_SUITE("table") {

TEST_CASE("relation labels on unit cells") {
  TableInstance t = testutil::grid2x2();
  const Cell& a = t.cells[0];  // (0,0)
  const Cell& b = t.cells[1];  // (0,1)
  const Cell& c = t.cells[2];  // (1,0)
  const Cell& d = t.cells[3];  // (1,1)

  CHECK(ground_truth_relation(a, b) == std::pair{true, false});
  CHECK(ground_truth_relation(a, c) == std::pair{false, true});
  CHECK(ground_truth_relation(a, d) == std::pair{false, false});
  CHECK(ground_truth_relation(b, c) == std::pair{false, false});

  // symmetry
  CHECK(ground_truth_relation(b, a) == ground_truth_relation(a, b));
  CHECK(ground_truth_relation(d, a) == ground_truth_relation(a, d));

  CHECK_THROWS_AS(ground_truth_relation(a, a), UsageError);
}

TEST_CASE("relation labels across spans use interval intersection") {
  // header spans rows 0..1 in column 0; body cells sit in rows 0 and 1
  Cell head = cell(0, 0, 1, 0, 0, {0, 0, 10, 20});
  Cell top = cell(1, 0, 0, 1, 1, {10, 0, 20, 10});
  Cell bottom = cell(2, 1, 1, 1, 1, {10, 10, 20, 20});
  Cell far_col = cell(3, 2, 2, 1, 1, {10, 20, 20, 30});

  CHECK(ground_truth_relation(head, top) == std::pair{true, false});
  CHECK(ground_truth_relation(head, bottom) == std::pair{true, false});
  CHECK(ground_truth_relation(head, far_col) == std::pair{false, false});
  CHECK(ground_truth_relation(top, bottom) == std::pair{false, true});

  // a column-spanning cell relates vertically to everything it covers
  Cell wide = cell(4, 2, 2, 0, 1, {0, 20, 20, 30});
  CHECK(ground_truth_relation(wide, top) == std::pair{false, true});
  CHECK(ground_truth_relation(wide, far_col) == std::pair{true, true});  // overlapping intervals
}

TEST_CASE("edge sample canonicalization") {
  EdgeSample e = EdgeSample::canonical(7, 3, true, false);
  CHECK(e.src == 3);
  CHECK(e.dst == 7);
  CHECK(e.label_h);
  CHECK_FALSE(e.label_v);
  CHECK(EdgeSample::canonical(3, 7, true, false) == e);
}

TEST_CASE("find_cell") {
  TableInstance t = testutil::grid2x2();
  REQUIRE(t.find_cell(2) != nullptr);
  CHECK(t.find_cell(2)->text == "c");
  CHECK(t.find_cell(42) == nullptr);
}

TEST_CASE("a well-formed table validates clean") {
  CHECK(validate_table(testutil::grid2x2()).ok());
  CHECK(validate_table(testutil::grid_with_colspan()).ok());
}

TEST_CASE("validator catches each invariant violation") {
  SUBCASE("bad bbox") {
    TableInstance t = testutil::grid2x2();
    t.cells[1].bbox = {50, 10, 40, 40};  // x0 > x1
    ValidationReport r = validate_table(t);
    CHECK_FALSE(r.ok());
    CHECK(r.has(ViolationKind::BadBBox));
  }
  SUBCASE("span order") {
    TableInstance t = testutil::grid2x2();
    t.cells[0].row_start = 1;
    t.cells[0].row_end = 0;
    CHECK(validate_table(t).has(ViolationKind::BadSpanOrder));
  }
  SUBCASE("span outside grid") {
    TableInstance t = testutil::grid2x2();
    t.cells[3].col_end = 5;
    CHECK(validate_table(t).has(ViolationKind::SpanOutOfGrid));
  }
  SUBCASE("overlapping spans") {
    TableInstance t = testutil::grid2x2();
    t.cells[3].row_start = 0;  // now covers (0,1) and (1,1); cell 1 also claims (0,1)
    ValidationReport r = validate_table(t);
    CHECK(r.has(ViolationKind::SpanOverlap));
  }
  SUBCASE("bbox outside table") {
    TableInstance t = testutil::grid2x2();
    t.cells[2].bbox = {-5, 60, 40, 90};
    CHECK(validate_table(t).has(ViolationKind::BBoxOutsideTable));
  }
  SUBCASE("empty text on a non-placeholder") {
    TableInstance t = testutil::grid2x2();
    t.cells[0].text.clear();
    CHECK(validate_table(t).has(ViolationKind::EmptyText));
    t.cells[0].placeholder = true;  // structural empties are fine
    CHECK_FALSE(validate_table(t).has(ViolationKind::EmptyText));
  }
  SUBCASE("duplicate ids") {
    TableInstance t = testutil::grid2x2();
    t.cells[3].id = 0;
    // the duplicate also makes the two span rectangles ambiguous, but the
    // id report must fire regardless
    CHECK(validate_table(t).has(ViolationKind::DuplicateId));
  }
  SUBCASE("bad grid") {
    TableInstance t = testutil::grid2x2();
    t.n_cols = 0;
    CHECK(validate_table(t).has(ViolationKind::BadGrid));
    TableInstance u = testutil::grid2x2();
    u.table_bbox = {0, 0, 0, 100};
    CHECK(validate_table(u).has(ViolationKind::BadGrid));
  }
}

TEST_CASE("violation report names the offending cells") {
  TableInstance t = testutil::grid2x2();
  t.cells[3].row_start = 0;
  ValidationReport r = validate_table(t);
  REQUIRE(r.has(ViolationKind::SpanOverlap));
  bool found = false;
  for (const auto& v : r.violations) {
    if (v.kind != ViolationKind::SpanOverlap) continue;
    found = true;
    REQUIRE(v.cell_ids.size() == 2);
    CHECK(((v.cell_ids[0] == 1 && v.cell_ids[1] == 3) ||
           (v.cell_ids[0] == 3 && v.cell_ids[1] == 1)));
  }
  CHECK(found);
  CHECK_FALSE(r.str().empty());
}

}  // TEST_SUITE
