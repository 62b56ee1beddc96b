// End-to-end acceptance harness. Each numbered check prints one [PASS] or
// [FAIL] line with the measured numbers; the process exits nonzero when any
// check fails. Slow checks (training) are capped by wall-clock budgets that
// are asserted, not just observed.
//
// usage: gfte_acceptance <path-to-gfte-binary> <scratch-dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfte/cellgraph.hpp"
#include "gfte/checkpoint.hpp"
#include "gfte/dataset.hpp"
#include "gfte/generator.hpp"
#include "gfte/recover.hpp"
#include "gfte/scitsr.hpp"
#include "gfte/train.hpp"

using namespace gfte;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Env {
  std::string gfte;
  fs::path work;
  std::vector<TableInstance> corpus;  // 500 seeded tables, shared by checks 2/3/5
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << content;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& p : fs::recursive_directory_iterator(root))
    if (p.is_regular_file())
      out[fs::relative(p.path(), root).generic_string()] = read_file(p.path());
  return out;
}

char fmt_buf[512];
template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(fmt_buf, sizeof(fmt_buf), f, args...);
  return fmt_buf;
}

// ---------------------------------------------------------------------------
// 1. gradient integrity via the CLI: full model, 64-bit, 4-cell table

bool check_gradcheck(Env& env, std::string& detail) {
  const auto t0 = Clock::now();
  RunResult r = run(env.gfte + " gradcheck --seed 1");
  const double secs = seconds_since(t0);
  if (r.code != 0) {
    detail = fmt("exit code %d in %.1fs", r.code, secs);
    return false;
  }
  // pull the reported maximum out of the summary line
  const std::string key = "max rel err ";
  const std::size_t at = r.output.find(key);
  double max_rel = -1.0;
  if (at != std::string::npos) max_rel = std::atof(r.output.c_str() + at + key.size());
  detail = fmt("max rel err %.3e (tol 1e-4), %.1fs (budget 60)", max_rel, secs);
  return r.output.find(": PASS") != std::string::npos && max_rel >= 0.0 && max_rel < 1e-4 &&
         secs < 60.0;
}

// ---------------------------------------------------------------------------
// 2. label-oracle equivalence on >= 500 tables

bool check_label_oracle(Env& env, std::string& detail) {
  const auto t0 = Clock::now();
  long long pairs = 0, mismatches = 0, both_true = 0;
  for (const TableInstance& t : env.corpus) {
    const CellGraph labeled = label_edges(complete_graph(t), t);
    // brute force over all distinct pairs, indexed independently of the graph
    std::map<std::pair<int, int>, std::pair<bool, bool>> brute;
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      for (std::size_t j = i + 1; j < t.cells.size(); ++j) {
        const auto hv = ground_truth_relation(t.cells[i], t.cells[j]);
        const int a = std::min(t.cells[i].id, t.cells[j].id);
        const int b = std::max(t.cells[i].id, t.cells[j].id);
        brute[{a, b}] = hv;
      }
    }
    if (brute.size() != labeled.edges.size()) {
      detail = "edge count mismatch on " + t.source_id;
      return false;
    }
    for (const EdgeSample& e : labeled.edges) {
      ++pairs;
      const auto hv = brute.at({e.src, e.dst});
      if (e.label_h != hv.first || e.label_v != hv.second) ++mismatches;
      if (e.label_h && e.label_v) ++both_true;
    }
  }
  const double secs = seconds_since(t0);
  detail = fmt("%zu tables, %lld pairs, %lld mismatches, %lld (row&col) labels, %.1fs (budget 60)",
               env.corpus.size(), pairs, mismatches, both_true, secs);
  return env.corpus.size() >= 500 && mismatches == 0 && both_true == 0 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 3. knn candidate sets: subset of complete, size bound, degenerate case

bool check_knn(Env& env, std::string& detail) {
  long long graphs = 0;
  for (const TableInstance& t : env.corpus) {
    const auto nodes = relative_positions(t);
    const int n = static_cast<int>(nodes.size());
    std::set<std::pair<int, int>> complete;
    for (const EdgeSample& e : complete_graph(t).edges) complete.insert({e.src, e.dst});

    for (int k : {1, 3, 6, n - 1}) {
      if (k < 1) continue;
      const CellGraph g = knn_graph(nodes, k);
      ++graphs;
      if (g.edges.size() > static_cast<std::size_t>(k) * static_cast<std::size_t>(n)) {
        detail = fmt("|E|=%zu exceeds k*|N|=%d on %s", g.edges.size(), k * n,
                     t.source_id.c_str());
        return false;
      }
      std::set<std::pair<int, int>> edges;
      for (const EdgeSample& e : g.edges) edges.insert({e.src, e.dst});
      for (const auto& e : edges) {
        if (!complete.count(e)) {
          detail = "edge outside the complete graph on " + t.source_id;
          return false;
        }
      }
      if (k >= n - 1 && edges != complete) {
        detail = "k = n-1 did not give the complete graph on " + t.source_id;
        return false;
      }
    }
  }
  detail = fmt("%zu tables, %lld graphs checked", env.corpus.size(), graphs);
  return env.corpus.size() >= 500;
}

// ---------------------------------------------------------------------------
// 4. structure recovery round-trip on ground-truth labels

bool check_recovery(Env&, std::string& detail) {
  GenSpec spec;
  spec.n_tables = 200;
  spec.merge_probability = 0.7;  // spanning cells are the hard part
  spec.seed = 99;
  const auto t0 = Clock::now();
  const auto tables = generate_tables(spec);

  int exact = 0, with_merges = 0;
  for (const TableInstance& t : tables) {
    const CellGraph g = label_edges(complete_graph(t), t);
    const RecoveredStructure s = recover_structure(g.nodes, g.edges);
    bool ok = s.n_rows == t.n_rows && s.n_cols == t.n_cols;
    for (const Cell& c : t.cells) {
      const RecoveredCell* r = s.find(c.id);
      ok = ok && r && r->row_start == c.row_start && r->row_end == c.row_end &&
           r->col_start == c.col_start && r->col_end == c.col_end;
    }
    exact += ok ? 1 : 0;
    for (const Cell& c : t.cells)
      if (!c.unit_span()) {
        ++with_merges;
        break;
      }
  }
  const double secs = seconds_since(t0);
  detail = fmt("%d/200 exact (%d tables contain merged cells), %.1fs (budget 60)", exact,
               with_merges, secs);
  return exact == 200 && with_merges > 0 && secs < 60.0;
}

// ---------------------------------------------------------------------------
// 5. learnability of the position variant

bool check_learnability(Env& env, std::string& detail) {
  TrainConfig cfg;
  cfg.model.variant = Variant::Pos;
  // position-only either way; the raw skip at the edge stage is what lets the
  // classifier see exact cell intervals instead of neighborhood averages
  cfg.model.edge_input_mode = EdgeInputMode::GcnPlusRaw;
  cfg.model.k = 6;
  cfg.model.gcn_hidden = 32;
  cfg.model.mlp_hidden = 64;
  cfg.epochs = 30;
  cfg.lr = 3e-3;
  cfg.holdout_fraction = 0.1;
  cfg.seed = 1;

  const auto t0 = Clock::now();
  const TrainOutput out = train(cfg, env.corpus);
  const double secs = seconds_since(t0);
  detail = fmt("pos variant (edge input gcn+raw): holdout accuracy h=%.4f (epoch %d) "
               "v=%.4f (epoch %d), %zu tables, %.0fs (budget 900)",
               out.horizontal.best_accuracy, out.horizontal.best_epoch,
               out.vertical.best_accuracy, out.vertical.best_epoch, env.corpus.size(), secs);
  return env.corpus.size() >= 500 && out.horizontal.best_accuracy >= 0.95 &&
         out.vertical.best_accuracy >= 0.95 && secs < 900.0;
}

// ---------------------------------------------------------------------------
// 6. ablation ordering: text never hurts much, image roughly neutral

bool check_ablation(Env&, std::string& detail) {
  GenSpec spec;
  spec.n_tables = 120;
  spec.seed = 7;
  const auto tables = generate_tables(spec);

  TrainConfig cfg;
  cfg.model.k = 6;
  cfg.model.gcn_hidden = 32;
  cfg.model.text_hidden = 32;
  cfg.model.embed_dim = 16;
  cfg.model.mlp_hidden = 64;
  cfg.model.img_channels = 16;
  cfg.model.max_text_len = 16;
  cfg.epochs = 12;
  cfg.lr = 3e-3;
  cfg.holdout_fraction = 0.15;
  cfg.seed = 1;

  const auto t0 = Clock::now();
  const AblationReport rep = run_ablation(cfg, tables);
  const double secs = seconds_since(t0);
  if (rep.rows.size() != 3) {
    detail = "expected 3 ablation rows";
    return false;
  }
  const AblationRow& pos = rep.rows[0];
  const AblationRow& text = rep.rows[1];
  const AblationRow& full = rep.rows[2];
  detail = fmt("h: %.4f / %.4f / %.4f   v: %.4f / %.4f / %.4f (pos/pos+text/full), %.0fs",
               pos.accuracy_h, text.accuracy_h, full.accuracy_h, pos.accuracy_v, text.accuracy_v,
               full.accuracy_v, secs);
  const bool text_ok =
      text.accuracy_h >= pos.accuracy_h - 0.01 && text.accuracy_v >= pos.accuracy_v - 0.01;
  const bool full_ok =
      full.accuracy_h >= text.accuracy_h - 0.02 && full.accuracy_v >= text.accuracy_v - 0.02;
  return text_ok && full_ok;
}

// ---------------------------------------------------------------------------
// 7. byte-identical CLI outputs under a repeated seed

bool check_determinism(Env& env, std::string& detail) {
  const fs::path det = env.work / "determinism";
  std::vector<std::string> logs(2);
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = det / (rep ? "b" : "a");
    fs::create_directories(dir);
    const std::string cd = "cd '" + dir.string() + "' && " + env.gfte + " ";
    std::vector<std::string> cmds = {
        "gen --out data --n-tables 12 --seed 5",
        "train --dataset data --out run --epochs 2 --seed 5",
        "eval --dataset data --oracle --json --out eval_oracle.json",
        "eval --dataset data --checkpoint-h run/model_h.ckpt --checkpoint-v run/model_v.ckpt"
        " --json --out eval_model.json",
    };
    // first table of the freshly generated set feeds predict/recover
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      RunResult r = run(cd + cmds[i]);
      if (r.code != 0) {
        detail = "command failed: " + cmds[i] + " -> " + r.output.substr(0, 120);
        return false;
      }
      logs[static_cast<std::size_t>(rep)] += "$ " + cmds[i] + "\n" + r.output;
    }
    std::string first_table;
    for (const auto& p : fs::directory_iterator(dir / "data" / "tables"))
      if (first_table.empty() || p.path().filename().string() < first_table)
        first_table = p.path().filename().string();
    const std::string stem = first_table.substr(0, first_table.size() - 5);
    std::vector<std::string> more = {
        "predict --checkpoint-h run/model_h.ckpt --checkpoint-v run/model_v.ckpt"
        " --table data/tables/" + stem + ".json --image data/images/" + stem +
            ".pgm --out pred.json",
        "recover --relations pred.json --format json --out grid.json",
        "recover --relations pred.json --format csv --out grid.csv",
        "recover --relations pred.json --format html --out grid.html",
    };
    for (const auto& cmd : more) {
      RunResult r = run(cd + cmd);
      if (r.code != 0) {
        detail = "command failed: " + cmd + " -> " + r.output.substr(0, 120);
        return false;
      }
      logs[static_cast<std::size_t>(rep)] += "$ " + cmd + "\n" + r.output;
    }
  }

  if (logs[0] != logs[1]) {
    detail = "stdout differs between repeats";
    return false;
  }
  const auto a = tree_bytes(det / "a");
  const auto b = tree_bytes(det / "b");
  if (a.size() != b.size()) {
    detail = fmt("file count differs: %zu vs %zu", a.size(), b.size());
    return false;
  }
  for (const auto& [rel, bytes] : a) {
    auto it = b.find(rel);
    if (it == b.end() || it->second != bytes) {
      detail = "byte difference in " + rel;
      return false;
    }
  }
  detail = fmt("%zu files byte-identical across repeats (incl. checkpoints, reports, exports)",
               a.size());
  return true;
}

// ---------------------------------------------------------------------------
// 8. serialization: checkpoint round trip, dataset json round trip

bool check_serialization(Env& env, std::string& detail) {
  // checkpoint: a full-variant model with every tensor family present
  ModelConfig mc;
  mc.variant = Variant::Full;
  mc.k = 4;
  mc.gcn_hidden = 16;
  mc.text_hidden = 8;
  mc.embed_dim = 6;
  mc.mlp_hidden = 24;
  mc.img_channels = 8;
  mc.max_text_len = 12;
  mc.seed = 77;
  GenSpec spec;
  spec.n_tables = 3;
  spec.seed = 321;
  const auto tables = generate_tables(spec);
  const Vocabulary vocab = build_vocab(tables, mc.max_text_len);
  GfteModel<float> model = GfteModel<float>::build(mc, vocab);
  for (const auto& [name, param] : model.params().entries()) {
    Tensor<float> t = param;  // shares the underlying node
    for (Index i = 0; i < t.numel(); ++i)
      t.value()[i] += 0.01f * static_cast<float>((i % 11) - 5);
  }

  const fs::path ckpt = env.work / "roundtrip.ckpt";
  save_checkpoint(model, ckpt.string());
  const GfteModel<float> back = load_checkpoint(ckpt.string());

  const CellGraph g = knn_graph(relative_positions(tables[0]), 4);
  const std::vector<double> p1 = model.forward(tables[0], g);
  const std::vector<double> p2 = back.forward(tables[0], g);
  if (p1 != p2) {  // bitwise: float32 params are stored exactly
    detail = "forward outputs differ after checkpoint round trip";
    return false;
  }
  const fs::path ckpt2 = env.work / "roundtrip2.ckpt";
  save_checkpoint(back, ckpt2.string());
  if (read_file(ckpt) != read_file(ckpt2)) {
    detail = "re-saved checkpoint is not byte-identical";
    return false;
  }

  // dataset: every field populated, incl. the awkward ones
  TableInstance t;
  t.source_id = "rt";
  t.table_bbox = {0.0, 0.0, 120.5, 60.0 + 1.0 / 3.0};
  t.n_rows = 2;
  t.n_cols = 2;
  t.unit = "万元";
  Cell c0;
  c0.id = 0;
  c0.text = "caf\xc3\xa9 -42.5%";
  c0.bbox = {1.25, 2.5, 60.75, 30.125};
  c0.row_start = 0;
  c0.row_end = 0;
  c0.col_start = 0;
  c0.col_end = 1;
  Cell c1;
  c1.id = 1;
  c1.text = "";
  c1.placeholder = true;
  c1.bbox = {10.0, 31.0, 20.0, 40.0};
  c1.row_start = 1;
  c1.row_end = 1;
  c1.col_start = 0;
  c1.col_end = 0;
  Cell c2 = c1;
  c2.id = 2;
  c2.text = "0.001";
  c2.placeholder = false;
  c2.bbox = {61.0, 31.0, 90.0, 40.0};
  c2.col_start = 1;
  c2.col_end = 1;
  t.cells = {c0, c1, c2};
  t.image = Grayscale::Constant(30, 60, 1.0f);  // pgm is 8-bit: use exact k/255 levels
  t.image(12, 34) = 128.0f / 255.0f;

  const fs::path ds = env.work / "ds_roundtrip";
  write_dataset({t}, ds.string());
  const auto loaded = load_dataset(read_manifest(ds.string()));
  if (loaded.size() != 1) {
    detail = "dataset round trip lost the table";
    return false;
  }
  const TableInstance& lt = loaded[0];
  bool fields_ok = lt.source_id == t.source_id && lt.n_rows == t.n_rows &&
                   lt.n_cols == t.n_cols && lt.unit == t.unit && lt.table_bbox == t.table_bbox &&
                   lt.cells.size() == t.cells.size() && (lt.image == t.image).all();
  for (std::size_t i = 0; fields_ok && i < t.cells.size(); ++i) {
    const Cell& x = t.cells[i];
    const Cell& y = lt.cells[i];
    fields_ok = x.id == y.id && x.text == y.text && x.bbox == y.bbox &&
                x.row_start == y.row_start && x.row_end == y.row_end &&
                x.col_start == y.col_start && x.col_end == y.col_end &&
                x.placeholder == y.placeholder;
  }
  if (!fields_ok) {
    detail = "dataset round trip changed a field";
    return false;
  }
  detail = "checkpoint forward bit-identical; dataset json preserves all fields";
  return true;
}

// ---------------------------------------------------------------------------
// 9. SciTSR-format evaluation protocol on a hand-built fixture

void write_scitsr_fixture(const fs::path& dir) {
  // fin1: plain 2x2. 6 pairs: 2 same-row, 2 same-col, 2 neither.
  write_file(dir / "structure" / "fin1.json", R"({"cells": [
    {"id": 0, "content": ["net"], "start_row": 0, "end_row": 0, "start_col": 0, "end_col": 0},
    {"id": 1, "content": ["gross"], "start_row": 0, "end_row": 0, "start_col": 1, "end_col": 1},
    {"id": 2, "content": ["1.5"], "start_row": 1, "end_row": 1, "start_col": 0, "end_col": 0},
    {"id": 3, "content": ["2.5"], "start_row": 1, "end_row": 1, "start_col": 1, "end_col": 1}
  ]})");
  write_file(dir / "chunk" / "fin1.chunk", R"({"chunks": [
    {"pos": [10, 40, 30, 40], "text": "net"},
    {"pos": [60, 90, 30, 40], "text": "gross"},
    {"pos": [10, 40, 10, 20], "text": "1.5"},
    {"pos": [60, 90, 10, 20], "text": "2.5"}
  ]})");

  // fin2: header over three columns. 6 pairs: 3 same-row, 3 same-col.
  write_file(dir / "structure" / "fin2.json", R"({"cells": [
    {"id": 0, "content": ["assets"], "start_row": 0, "end_row": 0, "start_col": 0, "end_col": 2},
    {"id": 1, "content": ["a"], "start_row": 1, "end_row": 1, "start_col": 0, "end_col": 0},
    {"id": 2, "content": ["b"], "start_row": 1, "end_row": 1, "start_col": 1, "end_col": 1},
    {"id": 3, "content": ["c"], "start_row": 1, "end_row": 1, "start_col": 2, "end_col": 2}
  ]})");
  write_file(dir / "chunk" / "fin2.chunk", R"({"chunks": [
    {"pos": [10, 110, 30, 40], "text": "assets"},
    {"pos": [10, 30, 10, 20], "text": "a"},
    {"pos": [50, 70, 10, 20], "text": "b"},
    {"pos": [90, 110, 10, 20], "text": "c"}
  ]})");

  // fin3: a cell spanning rows 0-1. 10 pairs: 3 same-row, 4 same-col, 3 neither.
  write_file(dir / "structure" / "fin3.json", R"({"cells": [
    {"id": 0, "content": ["total"], "start_row": 0, "end_row": 1, "start_col": 0, "end_col": 0},
    {"id": 1, "content": ["x"], "start_row": 0, "end_row": 0, "start_col": 1, "end_col": 1},
    {"id": 2, "content": ["y"], "start_row": 1, "end_row": 1, "start_col": 1, "end_col": 1},
    {"id": 3, "content": ["sum"], "start_row": 2, "end_row": 2, "start_col": 0, "end_col": 0},
    {"id": 4, "content": ["z"], "start_row": 2, "end_row": 2, "start_col": 1, "end_col": 1}
  ]})");
  write_file(dir / "chunk" / "fin3.chunk", R"({"chunks": [
    {"pos": [10, 30, 25, 55], "text": "total"},
    {"pos": [50, 70, 45, 55], "text": "x"},
    {"pos": [50, 70, 25, 35], "text": "y"},
    {"pos": [10, 30, 5, 15], "text": "sum"},
    {"pos": [50, 70, 5, 15], "text": "z"}
  ]})");
}

bool check_scitsr_protocol(Env& env, std::string& detail) {
  const fs::path dir = env.work / "scitsr_fixture";
  write_scitsr_fixture(dir);

  // the loader must see exactly the hand-built structures
  const auto tables = load_scitsr_dir(dir.string());
  if (tables.size() != 3) {
    detail = fmt("fixture loaded %zu tables, wanted 3", tables.size());
    return false;
  }

  std::vector<const TableInstance*> ptrs;
  for (const auto& t : tables) ptrs.push_back(&t);

  // ground-truth predictor scores a perfect protocol run
  const EvalReport oracle = evaluate(OraclePredictor(6), ptrs, /*complete=*/true);
  // constant predictor reproduces the hand-counted positive rates:
  // 22 pairs total, 8 same-row, 9 same-col across the three tables
  const EvalReport yes = evaluate(ConstantPredictor(true, true, 6), ptrs, /*complete=*/true);
  const bool counts_ok = oracle.horizontal.total() == 22 && oracle.vertical.total() == 22 &&
                         yes.horizontal.tp == 8 && yes.vertical.tp == 9;
  const bool oracle_ok = oracle.horizontal.accuracy() == 1.0 && oracle.vertical.accuracy() == 1.0;
  const bool rate_ok = std::abs(yes.horizontal.accuracy() - 8.0 / 22.0) < 1e-12 &&
                       std::abs(yes.vertical.accuracy() - 9.0 / 22.0) < 1e-12;

  // the CLI path: same directory, same protocol, machine-readable report
  RunResult r = run(env.gfte + " eval --scitsr '" + dir.string() +
                    "' --oracle --complete-graph --json");
  bool cli_ok = r.code == 0;
  double cli_h = -1.0, cli_v = -1.0;
  long long cli_tables = 0;
  if (cli_ok) {
    try {
      const nlohmann::json j = nlohmann::json::parse(r.output);
      cli_h = j.at("horizontal").at("accuracy").get<double>();
      cli_v = j.at("vertical").at("accuracy").get<double>();
      cli_tables = j.at("tables").get<long long>();
      cli_ok = cli_h == 1.0 && cli_v == 1.0 && cli_tables == 3 &&
               j.at("graph").get<std::string>() == "complete";
    } catch (const nlohmann::json::exception&) {
      cli_ok = false;
    }
  }

  detail = fmt("oracle h/v accuracy %.3f/%.3f on 22 hand-counted pairs; constant rates %s; "
               "cli h/v %.3f/%.3f on %lld tables",
               oracle.horizontal.accuracy(), oracle.vertical.accuracy(),
               rate_ok ? "match" : "MISMATCH", cli_h, cli_v, cli_tables);
  return counts_ok && oracle_ok && rate_ok && cli_ok;
}

struct Outcome {
  int failed = 0;
};

void check(Outcome& o, int num, const char* name,
           const std::function<bool(std::string&)>& fn) {
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    ok = false;
  }
  std::printf("[%s] %d %-22s %s\n", ok ? "PASS" : "FAIL", num, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++o.failed;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: gfte_acceptance <gfte-binary> <scratch-dir>\n");
    return 2;
  }
  Env env;
  env.gfte = "'" + fs::absolute(argv[1]).string() + "'";  // commands cd around
  env.work = fs::absolute(argv[2]);
  std::error_code ec;
  fs::remove_all(env.work, ec);
  fs::create_directories(env.work);

  {
    GenSpec spec;
    spec.n_tables = 500;
    spec.seed = 20240814;
    env.corpus = generate_tables(spec);
  }

  Outcome o;
  check(o, 1, "gradient integrity", [&](std::string& d) { return check_gradcheck(env, d); });
  check(o, 2, "label oracle", [&](std::string& d) { return check_label_oracle(env, d); });
  check(o, 3, "knn candidates", [&](std::string& d) { return check_knn(env, d); });
  check(o, 4, "structure recovery", [&](std::string& d) { return check_recovery(env, d); });
  check(o, 5, "learnability", [&](std::string& d) { return check_learnability(env, d); });
  check(o, 6, "ablation ordering", [&](std::string& d) { return check_ablation(env, d); });
  check(o, 7, "cli determinism", [&](std::string& d) { return check_determinism(env, d); });
  check(o, 8, "serialization", [&](std::string& d) { return check_serialization(env, d); });
  check(o, 9, "scitsr protocol", [&](std::string& d) { return check_scitsr_protocol(env, d); });

  std::printf("%d/9 criteria passed\n", 9 - o.failed);
  return o.failed == 0 ? 0 : 1;
}
