#pragma once

#include <string>
#include <vector>

#include "gfte/table.hpp"

namespace gfte {

// Per-cell geometry normalized by the table bbox; all entries live in [0,1].
// Normalization removes translation and uniform scale, so graphs built from it
// are invariant under both.
struct NodeGeometry {
  int cell_id = 0;
  double rel_cx = 0.0, rel_cy = 0.0;
  double rel_w = 0.0, rel_h = 0.0;
  double rel_left = 0.0, rel_top = 0.0, rel_right = 0.0, rel_bottom = 0.0;
};

struct CellGraph {
  std::vector<NodeGeometry> nodes;  // ascending cell id
  std::vector<EdgeSample> edges;    // unique canonical pairs, src < dst
  int k = 0;                        // K used for construction (n-1 for complete)

  const NodeGeometry* find_node(int cell_id) const;
};

// One node per cell, ordered by ascending cell id.
std::vector<NodeGeometry> relative_positions(const TableInstance& t);

// Undirected union of each node's k nearest neighbors by Euclidean distance on
// normalized centers. Distance ties break toward the lower cell id so graphs
// are platform-stable. k >= n-1 degenerates to the complete graph.
CellGraph knn_graph(const std::vector<NodeGeometry>& nodes, int k);

// All C(n,2) canonical edges. Test oracle and small-table evaluation only.
CellGraph complete_graph(const TableInstance& t);

// Copies ground-truth (label_h, label_v) onto every edge of g.
CellGraph label_edges(const CellGraph& g, const TableInstance& t);

// Debug export: nodes + edges + labels, for inspection tooling.
std::string graph_to_json(const CellGraph& g);

}  // namespace gfte
