#pragma once

// Shared builders for the test suites. Tables built here are deliberately
// tiny and fully explicit so expected labels/spans can be read off by eye.

#include <cstdint>
#include <string>
#include <vector>

#include "gfte/ops.hpp"
#include "gfte/rng.hpp"
#include "gfte/table.hpp"
#include "gfte/tensor.hpp"

namespace testutil {

inline gfte::Cell cell(int id, int r0, int r1, int c0, int c1, gfte::BBox box,
                       std::string text = "x") {
  gfte::Cell c;
  c.id = id;
  c.text = std::move(text);
  c.bbox = box;
  c.row_start = r0;
  c.row_end = r1;
  c.col_start = c0;
  c.col_end = c1;
  return c;
}

// 2x2 grid of unit cells on a 100x100 canvas, ids 0..3 in row-major order.
inline gfte::TableInstance grid2x2() {
  gfte::TableInstance t;
  t.source_id = "grid2x2";
  t.table_bbox = {0, 0, 100, 100};
  t.n_rows = 2;
  t.n_cols = 2;
  t.cells = {
      cell(0, 0, 0, 0, 0, {10, 10, 40, 40}, "a"),
      cell(1, 0, 0, 1, 1, {60, 10, 90, 40}, "b"),
      cell(2, 1, 1, 0, 0, {10, 60, 40, 90}, "c"),
      cell(3, 1, 1, 1, 1, {60, 60, 90, 90}, "d"),
  };
  t.image = gfte::Grayscale::Constant(20, 20, 1.0f);
  return t;
}

// 2x2 grid whose top row is one cell spanning both columns.
inline gfte::TableInstance grid_with_colspan() {
  gfte::TableInstance t;
  t.source_id = "colspan";
  t.table_bbox = {0, 0, 100, 100};
  t.n_rows = 2;
  t.n_cols = 2;
  t.cells = {
      cell(0, 0, 0, 0, 1, {10, 10, 90, 40}, "head"),
      cell(1, 1, 1, 0, 0, {10, 60, 40, 90}, "c"),
      cell(2, 1, 1, 1, 1, {60, 60, 90, 90}, "d"),
  };
  t.image = gfte::Grayscale::Constant(20, 20, 1.0f);
  return t;
}

// Projects a tensor to a scalar through fixed pseudo-random weights. A plain
// sum gives every coordinate the same upstream gradient, which is blind to
// transposition bugs; distinct weights are not.
template <typename S>
gfte::Tensor<S> pin(const gfte::Tensor<S>& t, std::uint64_t salt = 7) {
  gfte::Rng rng(salt);
  std::vector<S> w(static_cast<std::size_t>(t.numel()));
  for (auto& v : w) v = static_cast<S>(rng.uniform(-1.0, 1.0));
  gfte::Tensor<S> c = gfte::Tensor<S>::from_data(t.shape(), std::move(w));
  return gfte::reduce_sum(gfte::mul(t, c));
}

}  // namespace testutil
