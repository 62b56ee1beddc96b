#include <algorithm>
#include <set>
#include <utility>

#include <doctest.h>

#include "gfte/error.hpp"
#include <json.hpp>

#include "gfte/cellgraph.hpp"
#include "gfte/generator.hpp"

#include "helpers.hpp"

using namespace gfte;

namespace {

std::set<std::pair<int, int>> edge_set(const CellGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges) s.insert({e.src, e.dst});
  return s;
}

}  // namespace

TEST_SUITE("cellgraph") {

TEST_CASE("relative positions worked example") {
  TableInstance t;
  t.source_id = "hand";
  t.table_bbox = {10, 20, 110, 220};  // w=100, h=200
  t.n_rows = 1;
  t.n_cols = 2;
  t.cells = {testutil::cell(1, 0, 0, 0, 0, {35, 60, 60, 100}),
             testutil::cell(0, 0, 0, 1, 1, {60, 60, 110, 220})};
  t.image = Grayscale::Constant(4, 4, 1.0f);

  auto nodes = relative_positions(t);
  REQUIRE(nodes.size() == 2);
  // sorted by id, so the cell listed second comes first
  CHECK(nodes[0].cell_id == 0);
  CHECK(nodes[1].cell_id == 1);

  const NodeGeometry& n = nodes[1];
  CHECK(n.rel_left == doctest::Approx(0.25));
  CHECK(n.rel_top == doctest::Approx(0.2));
  CHECK(n.rel_right == doctest::Approx(0.5));
  CHECK(n.rel_bottom == doctest::Approx(0.4));
  CHECK(n.rel_cx == doctest::Approx(0.375));
  CHECK(n.rel_cy == doctest::Approx(0.3));
  CHECK(n.rel_w == doctest::Approx(0.25));
  CHECK(n.rel_h == doctest::Approx(0.2));

  // all eight features stay in the unit interval for in-table cells
  for (const auto& g : nodes) {
    for (double f : {g.rel_left, g.rel_top, g.rel_right, g.rel_bottom, g.rel_cx, g.rel_cy,
                     g.rel_w, g.rel_h}) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }

  TableInstance degenerate = t;
  degenerate.table_bbox = {10, 20, 10, 220};
  CHECK_THROWS_AS(relative_positions(degenerate), DataError);
}

TEST_CASE("normalization is translation and scale invariant") {
  TableInstance t = testutil::grid2x2();
  auto base = relative_positions(t);

  TableInstance moved = t;
  moved.table_bbox = {500, -30, 700, 170};  // shift and x2 scale
  for (auto& c : moved.cells)
    c.bbox = {500 + 2 * c.bbox.x0, -30 + 2 * c.bbox.y0, 500 + 2 * c.bbox.x1, -30 + 2 * c.bbox.y1};

  auto shifted = relative_positions(moved);
  REQUIRE(shifted.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted[i].rel_cx == doctest::Approx(base[i].rel_cx));
    CHECK(shifted[i].rel_cy == doctest::Approx(base[i].rel_cy));
    CHECK(shifted[i].rel_w == doctest::Approx(base[i].rel_w));
  }
}

TEST_CASE("knn on a square with distance ties") {
  // four cells at the corners of a square; each node has two equidistant
  // nearest neighbours, and the tie must go to the lower cell id
  TableInstance t = testutil::grid2x2();
  auto nodes = relative_positions(t);
  CellGraph g = knn_graph(nodes, 1);

  CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}});
  CHECK(g.k == 1);
}

TEST_CASE("knn structural properties on generated tables") {
  GenSpec spec;
  spec.n_tables = 40;
  spec.seed = 2024;
  for (const TableInstance& t : generate_tables(spec)) {
    auto nodes = relative_positions(t);
    const int n = static_cast<int>(nodes.size());
    CellGraph complete = complete_graph(t);
    auto complete_edges = edge_set(complete);

    for (int k : {1, 3, n - 1, n + 5}) {
      if (k < 1) continue;
      CellGraph g = knn_graph(nodes, k);
      auto edges = edge_set(g);
      // subset of the complete graph, and the advertised size bound
      CHECK(static_cast<int>(edges.size()) <= k * n);
      CHECK(std::includes(complete_edges.begin(), complete_edges.end(), edges.begin(),
                          edges.end()));
      if (k >= n - 1) CHECK(edges == complete_edges);
    }

    // canonical edge ordering: src < dst, lexicographically sorted
    CellGraph g3 = knn_graph(nodes, 3);
    for (std::size_t i = 0; i < g3.edges.size(); ++i) {
      CHECK(g3.edges[i].src < g3.edges[i].dst);
      if (i > 0)
        CHECK(std::pair{g3.edges[i - 1].src, g3.edges[i - 1].dst} <
              std::pair{g3.edges[i].src, g3.edges[i].dst});
    }
  }
}

TEST_CASE("knn determinism") {
  GenSpec spec;
  spec.n_tables = 1;
  spec.seed = 7;
  TableInstance t = generate_tables(spec)[0];
  auto nodes = relative_positions(t);
  CellGraph a = knn_graph(nodes, 4);
  CellGraph b = knn_graph(nodes, 4);
  CHECK(edge_set(a) == edge_set(b));
}

TEST_CASE("knn input validation") {
  TableInstance t = testutil::grid2x2();
  auto nodes = relative_positions(t);
  CHECK_THROWS_AS(knn_graph(nodes, 0), UsageError);
  nodes.resize(1);
  CHECK_THROWS_AS(knn_graph(nodes, 1), DataError);

  TableInstance single = testutil::grid2x2();
  single.cells.resize(1);
  CHECK_THROWS_AS(complete_graph(single), DataError);
}

TEST_CASE("label_edges matches the brute-force oracle") {
  GenSpec spec;
  spec.n_tables = 20;
  spec.merge_probability = 1.0;  // exercise spanning cells
  spec.seed = 55;
  for (const TableInstance& t : generate_tables(spec)) {
    CellGraph labeled = label_edges(complete_graph(t), t);
    for (const auto& e : labeled.edges) {
      const auto [h, v] = ground_truth_relation(*t.find_cell(e.src), *t.find_cell(e.dst));
      CHECK(e.label_h == h);
      CHECK(e.label_v == v);
      // valid tables have disjoint span rectangles, so never both
      CHECK_FALSE((e.label_h && e.label_v));
    }
  }
}

TEST_CASE("label_edges rejects edges pointing outside the table") {
  TableInstance t = testutil::grid2x2();
  CellGraph g = complete_graph(t);
  g.edges.push_back(EdgeSample::canonical(0, 9));
  CHECK_THROWS_AS(label_edges(g, t), DataError);
}

TEST_CASE("graph json export round-trips through a parser") {
  TableInstance t = testutil::grid2x2();
  CellGraph g = label_edges(knn_graph(relative_positions(t), 2), t);
  nlohmann::json j = nlohmann::json::parse(graph_to_json(g));
  CHECK(j.at("k").get<int>() == 2);
  CHECK(j.at("nodes").size() == 4);
  CHECK(j.at("edges").size() == g.edges.size());
  CHECK(j.at("nodes")[0].at("cell_id").get<int>() == 0);
  CHECK(j.at("edges")[0].contains("label_h"));
  CHECK(j.at("edges")[0].contains("label_v"));
}

}  // TEST_SUITE
