#include "gfte/recover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gfte/error.hpp"

namespace gfte {

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

struct AxisResult {
  std::vector<int> start, end;  // per node index
  int count = 0;
};

// One run of steps 1-4 for a single axis. `coord` is rel_cy for rows, rel_cx
// for columns; `same` marks the axis label on each edge.
AxisResult solve_axis(const std::vector<NodeGeometry>& nodes,
                      const std::vector<std::pair<int, int>>& pairs, const char* axis_name,
                      bool rows, std::vector<std::string>& diagnostics) {
  const int n = static_cast<int>(nodes.size());
  auto coord = [&](int i) {
    const auto& nd = nodes[static_cast<std::size_t>(i)];
    return rows ? nd.rel_cy : nd.rel_cx;
  };

  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  std::set<std::pair<int, int>> edge_set;
  for (const auto& [u, v] : pairs) {
    adj[static_cast<std::size_t>(u)].insert(v);
    adj[static_cast<std::size_t>(v)].insert(u);
    edge_set.insert({std::min(u, v), std::max(u, v)});
  }

  // Step 1: the neighborhood-clique test. Partners of a span candidate sit in
  // different atomic rows and are therefore not related to each other.
  std::vector<char> flagged(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < n; ++u) {
    const auto& partners = adj[static_cast<std::size_t>(u)];
    for (auto a = partners.begin(); a != partners.end() && !flagged[static_cast<std::size_t>(u)]; ++a)
      for (auto b = std::next(a); b != partners.end(); ++b)
        if (!edge_set.count({std::min(*a, *b), std::max(*a, *b)})) {
          flagged[static_cast<std::size_t>(u)] = 1;
          break;
        }
  }

  // Step 2: atomic components among unflagged nodes.
  Dsu dsu(n);
  for (const auto& [u, v] : pairs)
    if (!flagged[static_cast<std::size_t>(u)] && !flagged[static_cast<std::size_t>(v)])
      dsu.unite(u, v);

  std::map<int, std::vector<int>> comp_members;
  for (int i = 0; i < n; ++i)
    if (!flagged[static_cast<std::size_t>(i)]) comp_members[dsu.find(i)].push_back(i);

  // Step 3: order components along the axis; ties break by lowest cell id so
  // the result never depends on input order.
  struct Comp {
    double mean;
    int min_id;
    std::vector<int> members;
  };
  std::vector<Comp> comps;
  for (auto& [root, members] : comp_members) {
    double mean = 0.0;
    int min_id = nodes[static_cast<std::size_t>(members.front())].cell_id;
    for (int i : members) {
      mean += coord(i);
      min_id = std::min(min_id, nodes[static_cast<std::size_t>(i)].cell_id);
    }
    comps.push_back({mean / static_cast<double>(members.size()), min_id, members});
  }
  std::sort(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) {
    if (a.mean != b.mean) return a.mean < b.mean;
    return a.min_id < b.min_id;
  });

  AxisResult res;
  res.start.assign(static_cast<std::size_t>(n), 0);
  res.end.assign(static_cast<std::size_t>(n), 0);

  if (comps.empty()) {
    // Every node flagged: no ordering backbone exists. Collapse to one band
    // rather than fail — predictions are allowed to be this bad.
    diagnostics.push_back(std::string(axis_name) + ": no atomic components; all nodes in band 0");
    res.count = 1;
    return res;
  }

  std::vector<int> band(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < comps.size(); ++k)
    for (int i : comps[k].members) band[static_cast<std::size_t>(i)] = static_cast<int>(k);
  res.count = static_cast<int>(comps.size());

  for (int u = 0; u < n; ++u) {
    if (!flagged[static_cast<std::size_t>(u)]) {
      res.start[static_cast<std::size_t>(u)] = res.end[static_cast<std::size_t>(u)] =
          band[static_cast<std::size_t>(u)];
      continue;
    }
    int lo = res.count, hi = -1;
    for (int v : adj[static_cast<std::size_t>(u)])
      if (!flagged[static_cast<std::size_t>(v)]) {
        lo = std::min(lo, band[static_cast<std::size_t>(v)]);
        hi = std::max(hi, band[static_cast<std::size_t>(v)]);
      }
    if (hi < 0) {
      // Step 4 fallback: nearest component centroid.
      int best = 0;
      double best_d = 1e300;
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const double d = std::abs(comps[k].mean - coord(u));
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(k);
        }
      }
      lo = hi = best;
      diagnostics.push_back(std::string(axis_name) + ": node " +
                            std::to_string(nodes[static_cast<std::size_t>(u)].cell_id) +
                            " has no unflagged partner; assigned band " + std::to_string(best));
    }
    res.start[static_cast<std::size_t>(u)] = lo;
    res.end[static_cast<std::size_t>(u)] = hi;
  }
  return res;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string cell_label(const RecoveredCell& c, const std::map<int, std::string>& texts) {
  auto it = texts.find(c.cell_id);
  return it != texts.end() ? it->second : "#" + std::to_string(c.cell_id);
}

}  // namespace

const RecoveredCell* RecoveredStructure::find(int cell_id) const {
  for (const auto& c : cells)
    if (c.cell_id == cell_id) return &c;
  return nullptr;
}

RecoveredStructure recover_structure(const std::vector<NodeGeometry>& nodes,
                                     const std::vector<EdgeSample>& edges) {
  if (nodes.empty()) throw UsageError("recover_structure: need at least one node");

  std::vector<NodeGeometry> sorted = nodes;
  std::sort(sorted.begin(), sorted.end(),
            [](const NodeGeometry& a, const NodeGeometry& b) { return a.cell_id < b.cell_id; });
  std::map<int, int> idx_of;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (idx_of.count(sorted[i].cell_id))
      throw UsageError("recover_structure: duplicate cell id " + std::to_string(sorted[i].cell_id));
    idx_of[sorted[i].cell_id] = static_cast<int>(i);
  }

  std::vector<std::pair<int, int>> row_pairs, col_pairs;
  for (const auto& e : edges) {
    auto su = idx_of.find(e.src), sv = idx_of.find(e.dst);
    if (su == idx_of.end() || sv == idx_of.end())
      throw UsageError("recover_structure: edge (" + std::to_string(e.src) + "," +
                       std::to_string(e.dst) + ") references an unknown node");
    if (e.label_h) row_pairs.emplace_back(su->second, sv->second);
    if (e.label_v) col_pairs.emplace_back(su->second, sv->second);
  }

  RecoveredStructure out;
  AxisResult rows = solve_axis(sorted, row_pairs, "rows", true, out.diagnostics);
  AxisResult cols = solve_axis(sorted, col_pairs, "cols", false, out.diagnostics);
  out.n_rows = rows.count;
  out.n_cols = cols.count;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.cells.push_back({sorted[i].cell_id, rows.start[i], rows.end[i], cols.start[i],
                         cols.end[i]});

  // Overlapping recovered spans are reported, not repaired.
  for (std::size_t i = 0; i < out.cells.size(); ++i)
    for (std::size_t j = i + 1; j < out.cells.size(); ++j) {
      const auto& a = out.cells[i];
      const auto& b = out.cells[j];
      if (a.row_start <= b.row_end && b.row_start <= a.row_end && a.col_start <= b.col_end &&
          b.col_start <= a.col_end)
        out.diagnostics.push_back("conflict: cells " + std::to_string(a.cell_id) + " and " +
                                  std::to_string(b.cell_id) + " overlap in the recovered grid");
    }
  return out;
}

StructureScore compare_structures(const RecoveredStructure& a, const TableInstance& b) {
  if (a.cells.size() != b.cells.size())
    throw UsageError("compare_structures: cell id universes differ (" +
                     std::to_string(a.cells.size()) + " vs " + std::to_string(b.cells.size()) +
                     " cells)");
  std::size_t matching = 0;
  for (const auto& rc : a.cells) {
    const Cell* c = b.find_cell(rc.cell_id);
    if (!c)
      throw UsageError("compare_structures: cell " + std::to_string(rc.cell_id) +
                       " missing from the reference table");
    if (rc.row_start == c->row_start && rc.row_end == c->row_end &&
        rc.col_start == c->col_start && rc.col_end == c->col_end)
      ++matching;
  }
  StructureScore score;
  score.agreement = static_cast<double>(matching) / static_cast<double>(a.cells.size());
  score.exact = matching == a.cells.size();
  return score;
}

std::string structure_to_json(const RecoveredStructure& s) {
  nlohmann::json j;
  j["n_rows"] = s.n_rows;
  j["n_cols"] = s.n_cols;
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : s.cells)
    cells.push_back({{"id", c.cell_id},
                     {"row", {c.row_start, c.row_end}},
                     {"col", {c.col_start, c.col_end}}});
  j["diagnostics"] = s.diagnostics;
  return j.dump(2) + "\n";
}

std::string structure_to_csv(const RecoveredStructure& s, const std::map<int, std::string>& texts) {
  std::vector<std::string> grid(static_cast<std::size_t>(s.n_rows * s.n_cols));
  for (const auto& c : s.cells) {
    const std::string label = cell_label(c, texts);
    for (int r = c.row_start; r <= c.row_end && r < s.n_rows; ++r)
      for (int k = c.col_start; k <= c.col_end && k < s.n_cols; ++k)
        if (r >= 0 && k >= 0) grid[static_cast<std::size_t>(r * s.n_cols + k)] = label;
  }
  std::ostringstream os;
  for (int r = 0; r < s.n_rows; ++r) {
    for (int k = 0; k < s.n_cols; ++k) {
      if (k) os << ",";
      os << csv_escape(grid[static_cast<std::size_t>(r * s.n_cols + k)]);
    }
    os << "\n";
  }
  return os.str();
}

std::string structure_to_html(const RecoveredStructure& s,
                              const std::map<int, std::string>& texts) {
  // Cells anchored at their top-left corner, spans as rowspan/colspan.
  std::vector<const RecoveredCell*> by_anchor;
  for (const auto& c : s.cells) by_anchor.push_back(&c);
  std::sort(by_anchor.begin(), by_anchor.end(), [](const RecoveredCell* a, const RecoveredCell* b) {
    if (a->row_start != b->row_start) return a->row_start < b->row_start;
    if (a->col_start != b->col_start) return a->col_start < b->col_start;
    return a->cell_id < b->cell_id;
  });

  std::ostringstream os;
  os << "<table>\n";
  std::size_t next = 0;
  for (int r = 0; r < s.n_rows; ++r) {
    os << "  <tr>";
    while (next < by_anchor.size() && by_anchor[next]->row_start == r) {
      const RecoveredCell* c = by_anchor[next++];
      os << "<td";
      if (c->row_end > c->row_start) os << " rowspan=\"" << (c->row_end - c->row_start + 1) << "\"";
      if (c->col_end > c->col_start) os << " colspan=\"" << (c->col_end - c->col_start + 1) << "\"";
      os << ">" << html_escape(cell_label(*c, texts)) << "</td>";
    }
    os << "</tr>\n";
  }
  os << "</table>\n";
  return os.str();
}

}  // namespace gfte
