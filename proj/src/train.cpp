#include "gfte/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gfte/adam.hpp"
#include "gfte/parallel.hpp"
#include "gfte/rng.hpp"

namespace gfte {

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw UsageError("train config: epochs must be >= 1");
  if (!(lr > 0.0)) throw UsageError("train config: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw UsageError("train config: betas must lie in [0,1)");
  if (!(eps > 0.0)) throw UsageError("train config: eps must be positive");
  if (patience < 0) throw UsageError("train config: patience must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw UsageError("train config: holdout_fraction must lie in [0,1)");
}

std::string TrainConfig::to_json() const {
  nlohmann::json j;
  j["variant"] = to_string(model.variant);
  j["edge_input_mode"] = to_string(model.edge_input_mode);
  j["k"] = model.k;
  j["gcn_hidden"] = model.gcn_hidden;
  j["text_hidden"] = model.text_hidden;
  j["embed_dim"] = model.embed_dim;
  j["mlp_hidden"] = model.mlp_hidden;
  j["img_channels"] = model.img_channels;
  j["max_text_len"] = model.max_text_len;
  j["threshold"] = model.threshold;
  j["epochs"] = epochs;
  j["lr"] = lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["patience"] = patience;
  j["holdout_fraction"] = holdout_fraction;
  j["class_weights"] = class_weights;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("train config: expected a JSON object");

  TrainConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const nlohmann::json& v = it.value();
      if (key == "variant") c.model.variant = variant_from_string(v.get<std::string>());
      else if (key == "edge_input_mode")
        c.model.edge_input_mode = edge_input_mode_from_string(v.get<std::string>());
      else if (key == "k") c.model.k = v.get<int>();
      else if (key == "gcn_hidden") c.model.gcn_hidden = v.get<int>();
      else if (key == "text_hidden") c.model.text_hidden = v.get<int>();
      else if (key == "embed_dim") c.model.embed_dim = v.get<int>();
      else if (key == "mlp_hidden") c.model.mlp_hidden = v.get<int>();
      else if (key == "img_channels") c.model.img_channels = v.get<int>();
      else if (key == "max_text_len") c.model.max_text_len = v.get<int>();
      else if (key == "threshold") c.model.threshold = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "beta1") c.beta1 = v.get<double>();
      else if (key == "beta2") c.beta2 = v.get<double>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "patience") c.patience = v.get<int>();
      else if (key == "holdout_fraction") c.holdout_fraction = v.get<double>();
      else if (key == "class_weights") c.class_weights = v.get<bool>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw UsageError("train config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("train config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

// A table with its candidate graph and per-edge labels for one direction,
// built once so epochs only pay for the forward/backward passes.
struct TableContext {
  const TableInstance* table = nullptr;
  CellGraph graph;
  std::vector<int> labels;
};

std::vector<TableContext> build_contexts(const std::vector<const TableInstance*>& tables,
                                         Direction dir, int k) {
  std::vector<TableContext> out;
  out.reserve(tables.size());
  for (const TableInstance* t : tables) {
    TableContext ctx;
    ctx.table = t;
    ctx.graph = label_edges(knn_graph(relative_positions(*t), k), *t);
    ctx.labels.reserve(ctx.graph.edges.size());
    for (const auto& e : ctx.graph.edges)
      ctx.labels.push_back((dir == Direction::Horizontal ? e.label_h : e.label_v) ? 1 : 0);
    out.push_back(std::move(ctx));
  }
  return out;
}

// Micro accuracy at the model's threshold; the same metric evaluate() reports.
double accuracy_on(const GfteModel<float>& model, const std::vector<TableContext>& ctxs) {
  std::int64_t correct = 0, total = 0;
  for (const auto& ctx : ctxs) {
    const std::vector<double> probs = model.forward(*ctx.table, ctx.graph);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const int pred = probs[i] >= model.config().threshold ? 1 : 0;
      correct += pred == ctx.labels[i] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<ArrayX<float>> snapshot_params(const ParamSet<float>& p) {
  std::vector<ArrayX<float>> snap;
  snap.reserve(p.size());
  for (const auto& [name, t] : p.entries()) {
    (void)name;
    snap.push_back(t.value());
  }
  return snap;
}

void restore_params(const ParamSet<float>& p, const std::vector<ArrayX<float>>& snap) {
  const auto& entries = p.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].second.node()->value = snap[i];
}

std::vector<double> inverse_frequency_weights(const std::vector<TableContext>& ctxs) {
  std::int64_t pos = 0, neg = 0;
  for (const auto& ctx : ctxs)
    for (int y : ctx.labels) (y ? pos : neg) += 1;
  const double total = static_cast<double>(pos + neg);
  return {total / (2.0 * static_cast<double>(std::max<std::int64_t>(neg, 1))),
          total / (2.0 * static_cast<double>(std::max<std::int64_t>(pos, 1)))};
}

}  // namespace

TrainResult train_direction(const TrainConfig& cfg, Direction dir,
                            const std::vector<const TableInstance*>& train_tables,
                            const std::vector<const TableInstance*>& eval_tables,
                            const Vocabulary& vocab) {
  cfg.validate();
  if (train_tables.empty()) throw DataError("train: no training tables");
  if (eval_tables.empty()) throw DataError("train: no evaluation tables");

  ModelConfig mc = cfg.model;
  mc.direction = dir;
  mc.seed = cfg.seed;
  mc.vocab_fingerprint.clear();  // adopt the vocabulary we were handed

  TrainResult res{GfteModel<float>::build(mc, vocab), {}, 0, -1.0, false};

  std::vector<TableContext> train_ctx = build_contexts(train_tables, dir, mc.k);
  std::vector<TableContext> eval_ctx = build_contexts(eval_tables, dir, mc.k);

  std::vector<double> class_weights;
  if (cfg.class_weights) class_weights = inverse_frequency_weights(train_ctx);

  Adam<float> opt(res.model.params(), AdamConfig{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps});

  std::vector<std::size_t> order(train_ctx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<ArrayX<float>> best;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Same visit order for both directions at a given epoch, by construction.
    Rng(cfg.seed).substream("shuffle/epoch" + std::to_string(epoch)).shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const TableContext& ctx = train_ctx[idx];
      EdgeActivations<float> act = res.model.edge_logits(*ctx.table, ctx.graph);
      // One row per edge orientation; symmetry comes from training on both.
      Tensor<float> both = concat_rows<float>({act.logits_uv, act.logits_vu});
      std::vector<int> labels2 = ctx.labels;
      labels2.insert(labels2.end(), ctx.labels.begin(), ctx.labels.end());
      Tensor<float> loss = cross_entropy(both, labels2, class_weights);
      const double l = static_cast<double>(loss.item());
      if (!std::isfinite(l))
        throw NumericError("train: non-finite loss on table " + ctx.table->source_id +
                           " at epoch " + std::to_string(epoch));
      loss.backward();
      opt.step();
      loss_sum += l;
    }

    const double train_loss = loss_sum / static_cast<double>(train_ctx.size());
    const double acc = accuracy_on(res.model, eval_ctx);
    res.curve.push_back({epoch, train_loss, acc});

    if (acc > res.best_accuracy) {
      res.best_accuracy = acc;
      res.best_epoch = epoch;
      best = snapshot_params(res.model.params());
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      res.stopped_early = true;
      break;
    }
  }

  restore_params(res.model.params(), best);
  return res;
}

TrainOutput train(const TrainConfig& cfg, const std::vector<TableInstance>& tables) {
  cfg.validate();
  if (tables.empty()) throw DataError("train: empty dataset");

  std::vector<std::size_t> idx(tables.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng(cfg.seed).substream("split").shuffle(idx);

  std::size_t n_hold = static_cast<std::size_t>(
      std::llround(cfg.holdout_fraction * static_cast<double>(tables.size())));
  n_hold = std::min(n_hold, tables.size() - 1);  // always keep something to train on
  const std::size_t n_train = tables.size() - n_hold;

  std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> hold_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());

  std::vector<const TableInstance*> train_ptrs, hold_ptrs;
  for (std::size_t i : train_idx) train_ptrs.push_back(&tables[i]);
  for (std::size_t i : hold_idx) hold_ptrs.push_back(&tables[i]);
  // Tiny datasets may round the holdout down to nothing; evaluate on the
  // training set then, which at least tracks memorization.
  const auto& eval_ptrs = hold_ptrs.empty() ? train_ptrs : hold_ptrs;

  Vocabulary vocab = build_vocab(train_ptrs, cfg.model.max_text_len);

  TrainResult h = train_direction(cfg, Direction::Horizontal, train_ptrs, eval_ptrs, vocab);
  TrainResult v = train_direction(cfg, Direction::Vertical, train_ptrs, eval_ptrs, vocab);
  return {std::move(h), std::move(v), std::move(vocab), std::move(train_idx), std::move(hold_idx)};
}

// ---------------------------------------------------------------------------
// Predictors.

ModelPredictor::ModelPredictor(GfteModel<float> horizontal, GfteModel<float> vertical)
    : horizontal_(std::move(horizontal)), vertical_(std::move(vertical)) {
  if (horizontal_.config().direction != Direction::Horizontal ||
      vertical_.config().direction != Direction::Vertical)
    throw UsageError("ModelPredictor: models must be (horizontal, vertical), got (" +
                     to_string(horizontal_.config().direction) + ", " +
                     to_string(vertical_.config().direction) + ")");
  if (horizontal_.config().k != vertical_.config().k)
    throw UsageError("ModelPredictor: models disagree on k");
}

std::vector<EdgeSample> ModelPredictor::predict(const TableInstance& t, const CellGraph& g) const {
  return predict_relations(horizontal_, vertical_, t, g);
}

std::string ModelPredictor::describe() const {
  return "model variant=" + to_string(horizontal_.config().variant) +
         " h=" + horizontal_.config().fingerprint() + " v=" + vertical_.config().fingerprint();
}

std::vector<EdgeSample> OraclePredictor::predict(const TableInstance& t,
                                                 const CellGraph& g) const {
  return label_edges(g, t).edges;
}

std::vector<EdgeSample> ConstantPredictor::predict(const TableInstance& t,
                                                   const CellGraph& g) const {
  (void)t;
  std::vector<EdgeSample> out = g.edges;
  for (auto& e : out) {
    e.label_h = same_row_;
    e.label_v = same_col_;
  }
  return out;
}

std::string ConstantPredictor::describe() const {
  return std::string("constant h=") + (same_row_ ? "1" : "0") + " v=" + (same_col_ ? "1" : "0");
}

// ---------------------------------------------------------------------------
// Metrics.

double DirectionMetrics::accuracy() const {
  const std::int64_t t = total();
  return t == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(t);
}

double DirectionMetrics::precision() const {
  const std::int64_t d = tp + fp;
  return d == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(d);
}

double DirectionMetrics::recall() const {
  const std::int64_t d = tp + fn;
  return d == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(d);
}

namespace {

void tally(DirectionMetrics& m, bool truth, bool pred) {
  if (truth && pred) ++m.tp;
  else if (!truth && !pred) ++m.tn;
  else if (!truth && pred) ++m.fp;
  else ++m.fn;
}

}  // namespace

EvalReport evaluate(const EdgePredictor& predictor,
                    const std::vector<const TableInstance*>& tables, bool complete_graphs,
                    int jobs) {
  if (tables.empty()) throw DataError("evaluate: no tables");

  struct PerTable {
    DirectionMetrics h, v;
    TableBreakdown row;
  };
  std::vector<PerTable> parts(tables.size());

  parallel_for(tables.size(), jobs, [&](std::size_t i) {
    const TableInstance& t = *tables[i];
    CellGraph g =
        complete_graphs ? complete_graph(t) : knn_graph(relative_positions(t), predictor.k());
    const CellGraph truth = label_edges(g, t);
    const std::vector<EdgeSample> pred = predictor.predict(t, g);
    if (pred.size() != g.edges.size())
      throw UsageError("evaluate: predictor returned " + std::to_string(pred.size()) +
                       " edges for a graph with " + std::to_string(g.edges.size()));

    PerTable& p = parts[i];
    p.row.source_id = t.source_id;
    p.row.edges = static_cast<std::int64_t>(g.edges.size());
    for (std::size_t j = 0; j < pred.size(); ++j) {
      tally(p.h, truth.edges[j].label_h, pred[j].label_h);
      tally(p.v, truth.edges[j].label_v, pred[j].label_v);
      p.row.correct_h += pred[j].label_h == truth.edges[j].label_h ? 1 : 0;
      p.row.correct_v += pred[j].label_v == truth.edges[j].label_v ? 1 : 0;
    }
  });

  EvalReport rep;
  rep.tables = static_cast<std::int64_t>(tables.size());
  rep.complete_graphs = complete_graphs;
  rep.k = predictor.k();
  rep.predictor = predictor.describe();
  double macro_h = 0.0, macro_v = 0.0;
  for (const auto& p : parts) {  // index order, so the merge is deterministic
    rep.horizontal.tp += p.h.tp;
    rep.horizontal.tn += p.h.tn;
    rep.horizontal.fp += p.h.fp;
    rep.horizontal.fn += p.h.fn;
    rep.vertical.tp += p.v.tp;
    rep.vertical.tn += p.v.tn;
    rep.vertical.fp += p.v.fp;
    rep.vertical.fn += p.v.fn;
    rep.per_table.push_back(p.row);
    macro_h += p.row.edges == 0 ? 0.0
                                : static_cast<double>(p.row.correct_h) /
                                      static_cast<double>(p.row.edges);
    macro_v += p.row.edges == 0 ? 0.0
                                : static_cast<double>(p.row.correct_v) /
                                      static_cast<double>(p.row.edges);
  }
  rep.macro_h = macro_h / static_cast<double>(tables.size());
  rep.macro_v = macro_v / static_cast<double>(tables.size());
  return rep;
}

AblationReport run_ablation(const TrainConfig& cfg, const std::vector<TableInstance>& tables) {
  AblationReport rep;
  for (Variant variant : {Variant::Pos, Variant::PosText, Variant::Full}) {
    TrainConfig c = cfg;
    c.model.variant = variant;
    TrainOutput out = train(c, tables);

    std::vector<const TableInstance*> eval_ptrs;
    const auto& eval_idx = out.holdout_indices.empty() ? out.train_indices : out.holdout_indices;
    for (std::size_t i : eval_idx) eval_ptrs.push_back(&tables[i]);
    rep.holdout_tables = static_cast<std::int64_t>(eval_ptrs.size());

    const int best_h = out.horizontal.best_epoch, best_v = out.vertical.best_epoch;
    ModelPredictor mp(std::move(out.horizontal.model), std::move(out.vertical.model));
    if (variant == Variant::Pos) rep.config_fingerprint = mp.horizontal().config().fingerprint();
    const EvalReport er = evaluate(mp, eval_ptrs);
    rep.rows.push_back(
        {variant, er.horizontal.accuracy(), er.vertical.accuracy(), best_h, best_v});
  }
  return rep;
}

}  // namespace gfte
