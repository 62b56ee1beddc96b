#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfte/checkpoint.hpp"
#include "gfte/dataset.hpp"
#include "gfte/generator.hpp"
#include "gfte/gradcheck.hpp"
#include "gfte/parallel.hpp"
#include "gfte/recover.hpp"
#include "gfte/report.hpp"
#include "gfte/scitsr.hpp"
#include "gfte/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gfte;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("IO: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("IO: cannot open " + path + " for writing");
  out << content;
  if (!out) throw DataError("IO: short write to " + path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_text_file(out_path, content);
}

// Stable content hash over a directory tree (sorted relative paths + bytes);
// stands in for dataset_fingerprint when the input is not a native dataset.
std::string dir_fingerprint(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::vector<std::string> rel;
  rel.reserve(files.size());
  for (const auto& f : files) rel.push_back(f.lexically_relative(dir).generic_string());
  std::sort(rel.begin(), rel.end());
  std::uint64_t h = fnv1a64("gfte-dir");
  for (const auto& r : rel) {
    h = fnv1a64(r, h);
    h = fnv1a64(read_text_file((fs::path(dir) / r).string()), h);
  }
  return to_hex(h);
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_tables;
  int jobs = 1;
};

int cmd_gen(const GenOpts& o) {
  GenSpec spec = o.spec_path.empty() ? GenSpec{} : GenSpec::from_file(o.spec_path);
  if (o.seed) spec.seed = *o.seed;
  if (o.n_tables) spec.n_tables = *o.n_tables;
  spec.validate();

  std::vector<TableInstance> tables(static_cast<std::size_t>(spec.n_tables));
  parallel_for(tables.size(), o.jobs,
               [&](std::size_t i) { tables[i] = generate_table(spec, static_cast<int>(i)); });

  const DatasetManifest m = write_dataset(tables, o.out_dir, "gfte-gen " + spec.fingerprint());
  write_text_file((fs::path(o.out_dir) / "genspec.json").string(), spec.to_json() + "\n");

  std::cout << "wrote " << m.stats.tables << " tables (" << m.stats.cells << " cells, "
            << m.stats.merged_cells << " merged in " << m.stats.merged_tables
            << " tables) to " << o.out_dir << "\n"
            << "spec fingerprint: " << spec.fingerprint() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string config_path;
  std::string dataset_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> variant;
  std::optional<double> lr;
  std::optional<int> k;
  std::optional<double> holdout;
  std::optional<int> patience;
};

json train_side_json(const TrainResult& r) {
  json s;
  s["config_fingerprint"] = r.model.config().fingerprint();
  s["best_epoch"] = r.best_epoch;
  s["best_accuracy"] = r.best_accuracy;
  s["epochs_run"] = r.curve.size();
  s["stopped_early"] = r.stopped_early;
  return s;
}

int cmd_train(const TrainOpts& o) {
  TrainConfig cfg = o.config_path.empty() ? TrainConfig{} : TrainConfig::from_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.variant) cfg.model.variant = variant_from_string(*o.variant);
  if (o.lr) cfg.lr = *o.lr;
  if (o.k) cfg.model.k = *o.k;
  if (o.holdout) cfg.holdout_fraction = *o.holdout;
  if (o.patience) cfg.patience = *o.patience;
  cfg.dataset_dir = o.dataset_dir;
  cfg.validate();

  const FilterResult fr = filter_dataset(read_manifest(o.dataset_dir));
  for (const auto& r : fr.rejected)
    std::cerr << "skipping " << r.entry.table_path << ": " << r.reason << "\n";
  if (fr.tables.empty()) throw DataError("train: no usable tables in " + o.dataset_dir);
  const std::string data_fp = dataset_fingerprint(fr.accepted);

  TrainOutput out = train(cfg, fr.tables);

  fs::create_directories(o.out_dir);
  save_checkpoint(out.horizontal.model, (fs::path(o.out_dir) / "model_h.ckpt").string());
  save_checkpoint(out.vertical.model, (fs::path(o.out_dir) / "model_v.ckpt").string());
  write_text_file((fs::path(o.out_dir) / "loss.csv").string(),
                  loss_curves_csv(out.horizontal, out.vertical));

  json rep;
  rep["train_config"] = json::parse(cfg.to_json());
  rep["dataset_fingerprint"] = data_fp;
  rep["tables"] = fr.tables.size();
  rep["rejected"] = fr.rejected.size();
  rep["train_tables"] = out.train_indices.size();
  rep["holdout_tables"] = out.holdout_indices.size();
  rep["horizontal"] = train_side_json(out.horizontal);
  rep["vertical"] = train_side_json(out.vertical);
  write_text_file((fs::path(o.out_dir) / "train_report.json").string(), rep.dump(2) + "\n");

  char line[160];
  for (const auto& [name, r] :
       {std::pair<const char*, const TrainResult&>{"horizontal", out.horizontal},
        std::pair<const char*, const TrainResult&>{"vertical", out.vertical}}) {
    std::snprintf(line, sizeof(line), "%-11s best accuracy %.6f at epoch %d (%zu epochs run)\n",
                  name, r.best_accuracy, r.best_epoch, r.curve.size());
    std::cout << line;
  }
  std::cout << "checkpoints, loss.csv, train_report.json in " << o.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string dataset_dir;
  std::string scitsr_dir;
  std::string ckpt_h, ckpt_v;
  std::string config_path;  // ablation only
  std::string out_path;
  bool oracle = false;
  bool complete = false;
  bool ablation = false;
  bool json_out = false;
  int jobs = 1;
  int k = 6;
  std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalOpts& o) {
  if (o.dataset_dir.empty() == o.scitsr_dir.empty())
    throw UsageError("eval: pass exactly one of --dataset or --scitsr");

  std::vector<TableInstance> tables;
  std::string data_fp;
  if (!o.dataset_dir.empty()) {
    FilterResult fr = filter_dataset(read_manifest(o.dataset_dir));
    for (const auto& r : fr.rejected)
      std::cerr << "skipping " << r.entry.table_path << ": " << r.reason << "\n";
    data_fp = dataset_fingerprint(fr.accepted);
    tables = std::move(fr.tables);
  } else {
    tables = load_scitsr_dir(o.scitsr_dir);
    data_fp = dir_fingerprint(o.scitsr_dir);
  }
  if (tables.empty()) throw DataError("eval: no usable tables");

  if (o.ablation) {
    if (o.config_path.empty()) throw UsageError("eval: --ablation needs --config");
    TrainConfig cfg = TrainConfig::from_file(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    cfg.dataset_dir = o.dataset_dir.empty() ? o.scitsr_dir : o.dataset_dir;
    const AblationReport rep = run_ablation(cfg, tables);
    json wrap = json::parse(ablation_to_json(rep));
    wrap["dataset_fingerprint"] = data_fp;
    const std::string jtext = wrap.dump(2) + "\n";
    if (!o.out_path.empty()) write_text_file(o.out_path, jtext);
    if (o.json_out)
      std::cout << jtext;
    else
      std::cout << format_ablation(rep) << "dataset: " << data_fp << "\n";
    return 0;
  }

  std::unique_ptr<EdgePredictor> pred;
  if (o.oracle) {
    pred = std::make_unique<OraclePredictor>(o.k);
  } else {
    if (o.ckpt_h.empty() || o.ckpt_v.empty())
      throw UsageError("eval: pass --checkpoint-h and --checkpoint-v, or --oracle");
    pred = std::make_unique<ModelPredictor>(load_checkpoint(o.ckpt_h), load_checkpoint(o.ckpt_v));
  }

  std::vector<const TableInstance*> ptrs;
  ptrs.reserve(tables.size());
  for (const auto& t : tables) ptrs.push_back(&t);

  EvalReport rep = evaluate(*pred, ptrs, o.complete, o.jobs);
  rep.dataset_fingerprint = data_fp;

  if (!o.out_path.empty()) write_text_file(o.out_path, eval_report_to_json(rep));
  if (o.json_out)
    std::cout << eval_report_to_json(rep);
  else
    std::cout << format_eval_report(rep);
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
  std::string ckpt_h, ckpt_v;
  std::string table_path, image_path;
  std::string out_path;
  bool complete = false;
};

json relations_json(const ModelPredictor& mp, const TableInstance& t, const CellGraph& g,
                    const std::vector<EdgeSample>& edges, bool complete) {
  json j;
  j["source_id"] = t.source_id;
  j["graph"] = complete ? "complete" : "knn";
  j["k"] = g.k;
  j["model_h"] = mp.horizontal().config().fingerprint();
  j["model_v"] = mp.vertical().config().fingerprint();
  auto& nodes = j["nodes"] = json::array();
  for (const auto& nd : g.nodes) {
    const Cell* c = t.find_cell(nd.cell_id);
    nodes.push_back({{"id", nd.cell_id},
                     {"rel_cx", nd.rel_cx},
                     {"rel_cy", nd.rel_cy},
                     {"text", c ? c->text : ""}});
  }
  auto& es = j["edges"] = json::array();
  for (const auto& e : edges)
    es.push_back(
        {{"src", e.src}, {"dst", e.dst}, {"same_row", e.label_h}, {"same_col", e.label_v}});
  return j;
}

int cmd_predict(const PredictOpts& o) {
  ModelPredictor mp(load_checkpoint(o.ckpt_h), load_checkpoint(o.ckpt_v));
  const TableInstance t = load_table(o.table_path, o.image_path);
  const CellGraph g =
      o.complete ? complete_graph(t) : knn_graph(relative_positions(t), mp.k());
  const std::vector<EdgeSample> edges = mp.predict(t, g);
  emit(o.out_path, relations_json(mp, t, g, edges, o.complete).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// recover

struct RecoverOpts {
  std::string relations_path;
  std::string ckpt_h, ckpt_v;
  std::string table_path, image_path;
  std::string format = "json";
  std::string out_path;
  bool complete = false;
};

// Parses the cmd_predict output format back into recover_structure inputs.
void parse_relations(const std::string& text, std::vector<NodeGeometry>& nodes,
                     std::vector<EdgeSample>& edges, std::map<int, std::string>& texts,
                     std::string& source_id, std::string& fp_h, std::string& fp_v) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("relations: malformed JSON: ") + e.what());
  }
  static const std::map<std::string, int> known = {{"source_id", 0}, {"graph", 0}, {"k", 0},
                                                   {"model_h", 0},   {"model_v", 0},
                                                   {"nodes", 0},     {"edges", 0}};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw DataError("relations: unknown key '" + it.key() + "'");
  if (!j.contains("nodes") || !j.contains("edges"))
    throw DataError("relations: missing nodes or edges");
  try {
    source_id = j.value("source_id", "");
    fp_h = j.value("model_h", "");
    fp_v = j.value("model_v", "");
    for (const auto& n : j["nodes"]) {
      for (auto it = n.begin(); it != n.end(); ++it)
        if (it.key() != "id" && it.key() != "rel_cx" && it.key() != "rel_cy" && it.key() != "text")
          throw DataError("relations: unknown node key '" + it.key() + "'");
      NodeGeometry nd;
      nd.cell_id = n.at("id").get<int>();
      nd.rel_cx = n.at("rel_cx").get<double>();
      nd.rel_cy = n.at("rel_cy").get<double>();
      nodes.push_back(nd);
      if (n.contains("text")) texts[nd.cell_id] = n["text"].get<std::string>();
    }
    for (const auto& e : j["edges"]) {
      for (auto it = e.begin(); it != e.end(); ++it)
        if (it.key() != "src" && it.key() != "dst" && it.key() != "same_row" &&
            it.key() != "same_col")
          throw DataError("relations: unknown edge key '" + it.key() + "'");
      edges.push_back(EdgeSample::canonical(e.at("src").get<int>(), e.at("dst").get<int>(),
                                            e.at("same_row").get<bool>(),
                                            e.at("same_col").get<bool>()));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("relations: ") + e.what());
  }
}

int cmd_recover(const RecoverOpts& o) {
  const bool from_file = !o.relations_path.empty();
  const bool from_model = !o.ckpt_h.empty() || !o.ckpt_v.empty() || !o.table_path.empty();
  if (from_file == from_model)
    throw UsageError(
        "recover: pass either --relations, or --checkpoint-h/--checkpoint-v/--table/--image");

  std::vector<NodeGeometry> nodes;
  std::vector<EdgeSample> edges;
  std::map<int, std::string> texts;
  std::string source_id, fp_h, fp_v;

  if (from_file) {
    parse_relations(read_text_file(o.relations_path), nodes, edges, texts, source_id, fp_h, fp_v);
  } else {
    if (o.ckpt_h.empty() || o.ckpt_v.empty() || o.table_path.empty() || o.image_path.empty())
      throw UsageError("recover: model mode needs --checkpoint-h, --checkpoint-v, --table, --image");
    ModelPredictor mp(load_checkpoint(o.ckpt_h), load_checkpoint(o.ckpt_v));
    const TableInstance t = load_table(o.table_path, o.image_path);
    const CellGraph g =
        o.complete ? complete_graph(t) : knn_graph(relative_positions(t), mp.k());
    nodes = g.nodes;
    edges = mp.predict(t, g);
    for (const auto& c : t.cells) texts[c.id] = c.text;
    source_id = t.source_id;
    fp_h = mp.horizontal().config().fingerprint();
    fp_v = mp.vertical().config().fingerprint();
  }

  const RecoveredStructure s = recover_structure(nodes, edges);
  for (const auto& d : s.diagnostics) std::cerr << "recover: " << d << "\n";

  if (o.format == "json") {
    json j = json::parse(structure_to_json(s));
    if (!source_id.empty()) j["source_id"] = source_id;
    if (!fp_h.empty()) {
      j["model_h"] = fp_h;
      j["model_v"] = fp_v;
    }
    emit(o.out_path, j.dump(2) + "\n");
  } else if (o.format == "csv") {
    emit(o.out_path, structure_to_csv(s, texts));
  } else if (o.format == "html") {
    std::string html = structure_to_html(s, texts);
    if (!fp_h.empty())
      html += "<!-- gfte model_h=" + fp_h + " model_v=" + fp_v + " -->\n";
    emit(o.out_path, html);
  } else {
    throw UsageError("recover: unknown format '" + o.format + "' (json, csv, or html)");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckOpts {
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tol = 1e-4;
  Index max_coords = 64;
};

int cmd_gradcheck(const GradcheckOpts& o) {
  // Tiny but complete: a generated 2x2 table (4 cells, raster attached) through
  // the full-variant model at 64-bit, so every layer's gradient is on the path.
  GenSpec gs;
  gs.n_tables = 1;
  gs.rows_min = gs.rows_max = 2;
  gs.cols_min = gs.cols_max = 2;
  gs.merge_probability = 0.0;
  gs.seed = o.seed;
  const TableInstance t = generate_table(gs, 0);

  ModelConfig mc;
  mc.variant = Variant::Full;
  mc.k = 3;
  mc.gcn_hidden = 8;
  mc.text_hidden = 8;
  mc.embed_dim = 4;
  mc.mlp_hidden = 16;
  mc.img_channels = 8;
  mc.max_text_len = 8;
  mc.seed = o.seed;

  const Vocabulary vocab = build_vocab({&t}, mc.max_text_len);
  GfteModel<double> model = GfteModel<double>::build(mc, vocab);

  // Check at a generic point. At the exact init, zero biases put whole
  // ReLU-dead regions precisely on the kink, where the subgradient convention
  // and a central difference legitimately disagree by a step-independent
  // amount. Correctness of the backward pass is a property of generic points.
  for (const auto& [name, param] : model.params().entries()) {
    Rng jitter = Rng(o.seed).substream("gradcheck/jitter/" + name);
    auto node = param.node();
    for (Index i = 0; i < node->value.size(); ++i)
      node->value[i] += jitter.uniform(-0.05, 0.05);
  }

  const CellGraph g = label_edges(complete_graph(t), t);
  std::vector<int> labels2;
  for (const auto& e : g.edges) labels2.push_back(e.label_h ? 1 : 0);
  labels2.insert(labels2.end(), labels2.begin(), labels2.end());

  auto loss_fn = [&]() {
    EdgeActivations<double> act = model.edge_logits(t, g);
    return cross_entropy(concat_rows<double>({act.logits_uv, act.logits_vu}), labels2);
  };

  GradCheckOptions opts;
  opts.step = o.step;
  opts.tol = o.tol;
  opts.max_coords = o.max_coords;

  const auto t0 = std::chrono::steady_clock::now();
  const GradCheckReport rep = gradcheck<double>(model.params(), loss_fn, Rng(o.seed), opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %8s %14s\n", "parameter", "coords", "max rel err");
  std::cout << line;
  for (const auto& [name, err, coords] : rep.per_param) {
    std::snprintf(line, sizeof(line), "%-16s %8zu %14.3e\n", name.c_str(), coords, err);
    std::cout << line;
  }
  for (std::size_t i = 0; i < rep.failures.size() && i < 5; ++i) {
    const auto& f = rep.failures[i];
    std::snprintf(line, sizeof(line), "  fail %s[%lld]: analytic %.6e numeric %.6e rel %.3e\n",
                  f.param.c_str(), static_cast<long long>(f.coord), f.analytic, f.numeric,
                  f.rel_err);
    std::cout << line;
  }
  std::snprintf(line, sizeof(line),
                "%zu coords in %.1fs; max rel err %.3e at %s[%lld]; tolerance %.1e: %s\n",
                rep.coords_checked, secs, rep.max_rel_err, rep.worst_param.c_str(),
                static_cast<long long>(rep.worst_coord), opts.tol, rep.ok ? "PASS" : "FAIL");
  std::cout << line;
  std::cout << "config: " << model.config().fingerprint() << "\n";

  if (!rep.ok)
    throw NumericError("gradcheck: max rel err " + std::to_string(rep.max_rel_err) +
                       " exceeds tolerance in " + rep.worst_param);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based table structure toolkit"};
  app.require_subcommand(1);

  GenOpts gen_opts;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic table dataset");
  gen_cmd->add_option("--spec", gen_opts.spec_path, "generation spec JSON (built-in defaults when omitted)");
  gen_cmd->add_option("--out", gen_opts.out_dir, "output dataset directory")->required();
  gen_cmd->add_option("--seed", gen_opts.seed, "override the spec seed");
  gen_cmd->add_option("--n-tables", gen_opts.n_tables, "override the spec table count");
  gen_cmd->add_option("--jobs", gen_opts.jobs, "worker threads")->check(CLI::PositiveNumber);

  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "train horizontal + vertical relation models");
  train_cmd->add_option("--config", train_opts.config_path, "train config JSON (defaults when omitted)");
  train_cmd->add_option("--dataset", train_opts.dataset_dir, "dataset directory")->required();
  train_cmd->add_option("--out", train_opts.out_dir, "output directory for checkpoints/reports")->required();
  train_cmd->add_option("--seed", train_opts.seed, "override config seed");
  train_cmd->add_option("--epochs", train_opts.epochs, "override config epochs");
  train_cmd->add_option("--variant", train_opts.variant, "override variant (pos, pos+text, full)");
  train_cmd->add_option("--lr", train_opts.lr, "override learning rate");
  train_cmd->add_option("--k", train_opts.k, "override neighbour count");
  train_cmd->add_option("--holdout", train_opts.holdout, "override holdout fraction");
  train_cmd->add_option("--patience", train_opts.patience, "override early-stop patience (0 = off)");

  EvalOpts eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate edge accuracy on a dataset");
  eval_cmd->add_option("--dataset", eval_opts.dataset_dir, "native dataset directory");
  eval_cmd->add_option("--scitsr", eval_opts.scitsr_dir, "SciTSR-format directory (structure/ + chunk/)");
  eval_cmd->add_option("--checkpoint-h", eval_opts.ckpt_h, "horizontal model checkpoint");
  eval_cmd->add_option("--checkpoint-v", eval_opts.ckpt_v, "vertical model checkpoint");
  eval_cmd->add_flag("--oracle", eval_opts.oracle, "use ground-truth labels as the predictor");
  eval_cmd->add_option("--k", eval_opts.k, "neighbour count for --oracle graphs");
  eval_cmd->add_flag("--complete-graph", eval_opts.complete, "evaluate on all cell pairs instead of KNN");
  eval_cmd->add_flag("--ablation", eval_opts.ablation, "train and compare pos / pos+text / full");
  eval_cmd->add_option("--config", eval_opts.config_path, "train config JSON for --ablation");
  eval_cmd->add_option("--seed", eval_opts.seed, "override config seed for --ablation");
  eval_cmd->add_flag("--json", eval_opts.json_out, "print the JSON report instead of text");
  eval_cmd->add_option("--out", eval_opts.out_path, "also write the JSON report here");
  eval_cmd->add_option("--jobs", eval_opts.jobs, "worker threads")->check(CLI::PositiveNumber);

  PredictOpts predict_opts;
  auto* predict_cmd = app.add_subcommand("predict", "predict relations for one table");
  predict_cmd->add_option("--checkpoint-h", predict_opts.ckpt_h, "horizontal model checkpoint")->required();
  predict_cmd->add_option("--checkpoint-v", predict_opts.ckpt_v, "vertical model checkpoint")->required();
  predict_cmd->add_option("--table", predict_opts.table_path, "table JSON")->required();
  predict_cmd->add_option("--image", predict_opts.image_path, "table image (PGM)")->required();
  predict_cmd->add_flag("--complete-graph", predict_opts.complete, "score all cell pairs instead of KNN");
  predict_cmd->add_option("--out", predict_opts.out_path, "write relations JSON here (stdout otherwise)");

  RecoverOpts recover_opts;
  auto* recover_cmd = app.add_subcommand("recover", "rebuild the grid from predicted relations");
  recover_cmd->add_option("--relations", recover_opts.relations_path, "relations JSON from `predict`");
  recover_cmd->add_option("--checkpoint-h", recover_opts.ckpt_h, "horizontal model checkpoint");
  recover_cmd->add_option("--checkpoint-v", recover_opts.ckpt_v, "vertical model checkpoint");
  recover_cmd->add_option("--table", recover_opts.table_path, "table JSON (model mode)");
  recover_cmd->add_option("--image", recover_opts.image_path, "table image (model mode)");
  recover_cmd->add_flag("--complete-graph", recover_opts.complete, "score all cell pairs instead of KNN");
  recover_cmd->add_option("--format", recover_opts.format, "json, csv, or html (default json)");
  recover_cmd->add_option("--out", recover_opts.out_path, "output file (stdout otherwise)");

  GradcheckOpts gradcheck_opts;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full model");
  gradcheck_cmd->add_option("--seed", gradcheck_opts.seed, "table + init seed");
  gradcheck_cmd->add_option("--step", gradcheck_opts.step, "central difference step");
  gradcheck_cmd->add_option("--tol", gradcheck_opts.tol, "max allowed relative error");
  gradcheck_cmd->add_option("--max-coords", gradcheck_opts.max_coords, "coordinates sampled per tensor");

  int rc = 0;
  gen_cmd->callback([&] { rc = cmd_gen(gen_opts); });
  train_cmd->callback([&] { rc = cmd_train(train_opts); });
  eval_cmd->callback([&] { rc = cmd_eval(eval_opts); });
  predict_cmd->callback([&] { rc = cmd_predict(predict_opts); });
  recover_cmd->callback([&] { rc = cmd_recover(recover_opts); });
  gradcheck_cmd->callback([&] { rc = cmd_gradcheck(gradcheck_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // normalize CLI11's parse-error codes onto the contract
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
