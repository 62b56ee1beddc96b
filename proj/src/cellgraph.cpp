#include "gfte/cellgraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "gfte/error.hpp"

namespace gfte {

const NodeGeometry* CellGraph::find_node(int cell_id) const {
  for (const auto& n : nodes)
    if (n.cell_id == cell_id) return &n;
  return nullptr;
}

std::vector<NodeGeometry> relative_positions(const TableInstance& t) {
  const BBox& tb = t.table_bbox;
  if (!tb.positive_area()) throw DataError("relative_positions: table_bbox has non-positive area");
  const double w = tb.width(), h = tb.height();

  std::vector<NodeGeometry> nodes;
  nodes.reserve(t.cells.size());
  for (const auto& c : t.cells) {
    NodeGeometry n;
    n.cell_id = c.id;
    n.rel_left = (c.bbox.x0 - tb.x0) / w;
    n.rel_top = (c.bbox.y0 - tb.y0) / h;
    n.rel_right = (c.bbox.x1 - tb.x0) / w;
    n.rel_bottom = (c.bbox.y1 - tb.y0) / h;
    n.rel_cx = 0.5 * (n.rel_left + n.rel_right);
    n.rel_cy = 0.5 * (n.rel_top + n.rel_bottom);
    n.rel_w = n.rel_right - n.rel_left;
    n.rel_h = n.rel_bottom - n.rel_top;
    nodes.push_back(n);
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeGeometry& a, const NodeGeometry& b) { return a.cell_id < b.cell_id; });
  return nodes;
}

CellGraph knn_graph(const std::vector<NodeGeometry>& nodes, int k) {
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw DataError("knn_graph: need at least 2 nodes, got " + std::to_string(n));
  if (k < 1) throw UsageError("knn_graph: k must be >= 1");

  CellGraph g;
  g.nodes = nodes;
  g.k = k;

  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < n; ++i) {
    // (squared distance, cell id) sort gives the tie rule for free.
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n) - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = nodes[i].rel_cx - nodes[j].rel_cx;
      const double dy = nodes[i].rel_cy - nodes[j].rel_cy;
      cand.emplace_back(dx * dx + dy * dy, nodes[j].cell_id);
    }
    const int take = std::min<int>(k, n - 1);
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
    for (int m = 0; m < take; ++m) {
      const int a = std::min(nodes[i].cell_id, cand[static_cast<std::size_t>(m)].second);
      const int b = std::max(nodes[i].cell_id, cand[static_cast<std::size_t>(m)].second);
      seen.insert({a, b});
    }
  }
  for (const auto& [a, b] : seen) g.edges.push_back(EdgeSample::canonical(a, b));
  return g;
}

CellGraph complete_graph(const TableInstance& t) {
  if (t.cells.size() < 2)
    throw DataError("complete_graph: need at least 2 cells, got " + std::to_string(t.cells.size()));
  CellGraph g;
  g.nodes = relative_positions(t);
  g.k = static_cast<int>(g.nodes.size()) - 1;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < g.nodes.size(); ++j)
      g.edges.push_back(EdgeSample::canonical(g.nodes[i].cell_id, g.nodes[j].cell_id));
  return g;
}

CellGraph label_edges(const CellGraph& g, const TableInstance& t) {
  CellGraph out = g;
  for (auto& e : out.edges) {
    const Cell* a = t.find_cell(e.src);
    const Cell* b = t.find_cell(e.dst);
    if (!a || !b)
      throw DataError("label_edges: edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                      ") references a cell missing from the table");
    const auto [h, v] = ground_truth_relation(*a, *b);
    e.label_h = h;
    e.label_v = v;
  }
  return out;
}

std::string graph_to_json(const CellGraph& g) {
  nlohmann::json j;
  j["k"] = g.k;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"cell_id", n.cell_id},
                     {"rel_cx", n.rel_cx},
                     {"rel_cy", n.rel_cy},
                     {"rel_w", n.rel_w},
                     {"rel_h", n.rel_h},
                     {"rel_left", n.rel_left},
                     {"rel_top", n.rel_top},
                     {"rel_right", n.rel_right},
                     {"rel_bottom", n.rel_bottom}});
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges)
    edges.push_back(
        {{"src", e.src}, {"dst", e.dst}, {"label_h", e.label_h}, {"label_v", e.label_v}});
  return j.dump(2);
}

}  // namespace gfte
