#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfte/cellgraph.hpp"
#include "gfte/imgproc.hpp"
#include "gfte/layers.hpp"
#include "gfte/ops.hpp"
#include "gfte/table.hpp"
#include "gfte/vocab.hpp"

namespace gfte {

enum class Variant { Pos, PosText, Full };
enum class Direction { Horizontal, Vertical };

// Whether the edge classifier sees only the GCN outputs of the two endpoint
// nodes, or additionally the raw (pos [+ text]) node features. Both wirings
// are defensible readings of the architecture; GcnOnly is the default.
enum class EdgeInputMode { GcnOnly, GcnPlusRaw };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Pos: return "pos";
    case Variant::PosText: return "pos+text";
    case Variant::Full: return "full";
  }
  return "?";
}

inline std::string to_string(Direction d) {
  return d == Direction::Horizontal ? "horizontal" : "vertical";
}

inline std::string to_string(EdgeInputMode m) {
  return m == EdgeInputMode::GcnOnly ? "gcn" : "gcn+raw";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "pos") return Variant::Pos;
  if (s == "pos+text" || s == "postext") return Variant::PosText;
  if (s == "full") return Variant::Full;
  throw UsageError("unknown variant '" + s + "' (expected pos, pos+text, or full)");
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "horizontal" || s == "h") return Direction::Horizontal;
  if (s == "vertical" || s == "v") return Direction::Vertical;
  throw UsageError("unknown direction '" + s + "' (expected horizontal or vertical)");
}

inline EdgeInputMode edge_input_mode_from_string(const std::string& s) {
  if (s == "gcn") return EdgeInputMode::GcnOnly;
  if (s == "gcn+raw") return EdgeInputMode::GcnPlusRaw;
  throw UsageError("unknown edge_input_mode '" + s + "' (expected gcn or gcn+raw)");
}

struct ModelConfig {
  Variant variant = Variant::Pos;
  Direction direction = Direction::Horizontal;
  int k = 6;
  int gcn_hidden = 64;
  int text_hidden = 64;
  int embed_dim = 32;
  int mlp_hidden = 128;
  int img_channels = 32;  // final CNN channels; the stack runs C/4 -> C/2 -> C
  int max_text_len = 32;
  double threshold = 0.5;  // p >= threshold classifies positive (ties positive)
  EdgeInputMode edge_input_mode = EdgeInputMode::GcnOnly;
  std::string vocab_fingerprint;  // empty for the pos variant
  std::uint64_t seed = 1;

  bool uses_text() const { return variant != Variant::Pos; }
  bool uses_image() const { return variant == Variant::Full; }

  static constexpr int kPosDim = 8;

  int gcn_input_dim() const { return kPosDim + (uses_text() ? text_hidden : 0); }
  int per_node_dim() const {
    return gcn_hidden + (edge_input_mode == EdgeInputMode::GcnPlusRaw ? gcn_input_dim() : 0) +
           (uses_image() ? img_channels : 0);
  }
  int edge_input_dim() const { return 2 * per_node_dim(); }

  void validate() const {
    if (k < 1) throw UsageError("config: k must be >= 1");
    if (gcn_hidden < 1 || mlp_hidden < 1) throw UsageError("config: hidden dims must be >= 1");
    if (!(threshold >= 0.0 && threshold <= 1.0))
      throw UsageError("config: threshold must lie in [0,1]");
    if (uses_text() && (text_hidden < 1 || embed_dim < 1 || max_text_len < 1))
      throw UsageError("config: text variant needs positive text_hidden/embed_dim/max_text_len");
    if (uses_image() && (img_channels < 4 || img_channels % 4 != 0))
      throw UsageError("config: img_channels must be a positive multiple of 4");
  }

  // Unused dims zeroed so that configs differing only in irrelevant knobs
  // fingerprint identically (a pos model has no text or image dims).
  ModelConfig canonical() const {
    ModelConfig c = *this;
    if (!uses_text()) {
      c.text_hidden = 0;
      c.embed_dim = 0;
      c.max_text_len = 0;
      c.vocab_fingerprint.clear();
    }
    if (!uses_image()) c.img_channels = 0;
    return c;
  }

  std::string to_json() const {
    nlohmann::json j;
    j["variant"] = to_string(variant);
    j["direction"] = to_string(direction);
    j["k"] = k;
    j["gcn_hidden"] = gcn_hidden;
    j["text_hidden"] = text_hidden;
    j["embed_dim"] = embed_dim;
    j["mlp_hidden"] = mlp_hidden;
    j["img_channels"] = img_channels;
    j["max_text_len"] = max_text_len;
    j["threshold"] = threshold;
    j["edge_input_mode"] = to_string(edge_input_mode);
    j["vocab_fingerprint"] = vocab_fingerprint;
    j["seed"] = seed;
    return j.dump();
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    static const std::map<std::string, int> known = {
        {"variant", 0},      {"direction", 0},    {"k", 0},
        {"gcn_hidden", 0},   {"text_hidden", 0},  {"embed_dim", 0},
        {"mlp_hidden", 0},   {"img_channels", 0}, {"max_text_len", 0},
        {"threshold", 0},    {"edge_input_mode", 0}, {"vocab_fingerprint", 0},
        {"seed", 0}};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key())) throw DataError("model config: unknown key '" + it.key() + "'");
    ModelConfig c;
    try {
      c.variant = variant_from_string(j.at("variant").get<std::string>());
      c.direction = direction_from_string(j.at("direction").get<std::string>());
      c.k = j.at("k").get<int>();
      c.gcn_hidden = j.at("gcn_hidden").get<int>();
      c.text_hidden = j.at("text_hidden").get<int>();
      c.embed_dim = j.at("embed_dim").get<int>();
      c.mlp_hidden = j.at("mlp_hidden").get<int>();
      c.img_channels = j.at("img_channels").get<int>();
      c.max_text_len = j.at("max_text_len").get<int>();
      c.threshold = j.at("threshold").get<double>();
      c.edge_input_mode = edge_input_mode_from_string(j.at("edge_input_mode").get<std::string>());
      c.vocab_fingerprint = j.at("vocab_fingerprint").get<std::string>();
      c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("model config: ") + e.what());
    }
    return c;
  }

  std::string fingerprint() const { return to_hex(fnv1a64(canonical().to_json())); }
};

// Both orderings of every edge, canonical (src,dst) first. Training stacks the
// two; inference averages their softmaxes so predictions are symmetric.
template <typename S>
struct EdgeActivations {
  Tensor<S> logits_uv;  // {m, 2}
  Tensor<S> logits_vu;  // {m, 2}
};

template <typename S>
class GfteModel {
 public:
  static GfteModel build(ModelConfig cfg, const Vocabulary& vocab) {
    cfg.validate();
    if (cfg.uses_text()) {
      if (vocab.size() <= 2)
        throw UsageError("build_model: " + to_string(cfg.variant) + " variant needs a vocabulary");
      if (vocab.max_len() != cfg.max_text_len)
        throw UsageError("build_model: vocab max_len " + std::to_string(vocab.max_len()) +
                         " != config max_text_len " + std::to_string(cfg.max_text_len));
      if (cfg.vocab_fingerprint.empty())
        cfg.vocab_fingerprint = vocab.fingerprint();
      else if (cfg.vocab_fingerprint != vocab.fingerprint())
        throw DataError("build_model: vocab fingerprint mismatch (config " + cfg.vocab_fingerprint +
                        ", vocab " + vocab.fingerprint() + ")");
    } else {
      cfg.vocab_fingerprint.clear();
    }

    ParamSet<S> p(Rng(cfg.seed).substream("model/" + to_string(cfg.direction)));
    if (cfg.uses_text()) {
      const Index v = vocab.size(), e = cfg.embed_dim, h = cfg.text_hidden;
      p.glorot("embed/table", Shape{v, e}, v, e);
      p.glorot("lstm/w_ih", Shape{e, 4 * h}, e, 4 * h);
      p.glorot("lstm/w_hh", Shape{h, 4 * h}, h, 4 * h);
      p.zeros("lstm/bias", Shape{4 * h});
    }
    if (cfg.uses_image()) {
      const Index c1 = cfg.img_channels / 4, c2 = cfg.img_channels / 2, c3 = cfg.img_channels;
      p.glorot("conv1/weight", Shape{c1, 1, 3, 3}, 1 * 9, c1 * 9);
      p.zeros("conv1/bias", Shape{c1});
      p.glorot("conv2/weight", Shape{c2, c1, 3, 3}, c1 * 9, c2 * 9);
      p.zeros("conv2/bias", Shape{c2});
      p.glorot("conv3/weight", Shape{c3, c2, 3, 3}, c2 * 9, c3 * 9);
      p.zeros("conv3/bias", Shape{c3});
    }
    const Index gin = cfg.gcn_input_dim(), gh = cfg.gcn_hidden;
    p.glorot("gcn1/weight", Shape{gin, gh}, gin, gh);
    p.zeros("gcn1/bias", Shape{gh});
    p.glorot("gcn2/weight", Shape{gh, gh}, gh, gh);
    p.zeros("gcn2/bias", Shape{gh});
    const Index ein = cfg.edge_input_dim(), mh = cfg.mlp_hidden;
    p.glorot("mlp1/weight", Shape{ein, mh}, ein, mh);
    p.zeros("mlp1/bias", Shape{mh});
    p.glorot("mlp2/weight", Shape{mh, 2}, mh, 2);
    p.zeros("mlp2/bias", Shape{2});

    Vocabulary kept = cfg_vocab(cfg, vocab);
    return GfteModel(std::move(cfg), std::move(kept), std::move(p));
  }

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }

  // Full node + edge pipeline; caller owns softmax/loss. Gradients flow when
  // parameters require them, so the same path serves training and inference.
  EdgeActivations<S> edge_logits(const TableInstance& t, const CellGraph& g) const {
    if (g.nodes.empty()) throw UsageError("forward: graph has no nodes");
    if (g.edges.empty()) throw UsageError("forward: graph has no edges");
    const Index n = static_cast<Index>(g.nodes.size());

    std::map<int, Index> row_of;
    std::vector<const Cell*> cells(static_cast<std::size_t>(n), nullptr);
    for (Index i = 0; i < n; ++i) {
      const NodeGeometry& nd = g.nodes[static_cast<std::size_t>(i)];
      const Cell* c = t.find_cell(nd.cell_id);
      if (!c)
        throw DataError("forward: graph cell " + std::to_string(nd.cell_id) +
                        " missing from table " + t.source_id);
      row_of[nd.cell_id] = i;
      cells[static_cast<std::size_t>(i)] = c;
    }

    // Position block, in FeatureBundle order.
    std::vector<S> pos_data;
    pos_data.reserve(static_cast<std::size_t>(n) * ModelConfig::kPosDim);
    for (const auto& nd : g.nodes) {
      for (double f : {nd.rel_left, nd.rel_top, nd.rel_right, nd.rel_bottom, nd.rel_cx, nd.rel_cy,
                       nd.rel_w, nd.rel_h})
        pos_data.push_back(static_cast<S>(f));
    }
    Tensor<S> x = Tensor<S>::from_data(Shape{n, ModelConfig::kPosDim}, pos_data);

    if (cfg_.uses_text()) {
      const Index t_len = vocab_.max_len();
      std::vector<int> ids_flat;
      ids_flat.reserve(static_cast<std::size_t>(n * t_len));
      for (const Cell* c : cells) {
        std::vector<int> ids = encode_text(vocab_, c->text);
        ids_flat.insert(ids_flat.end(), ids.begin(), ids.end());
      }
      Tensor<S> text = lstm_last_state(ids_flat, n, t_len, params_.at("embed/table"),
                                       params_.at("lstm/w_ih"), params_.at("lstm/w_hh"),
                                       params_.at("lstm/bias"));
      x = concat_cols<S>({x, text});
    }

    Tensor<S> ahat = normalized_adjacency<S>(g);
    Tensor<S> h1 = relu(graph_conv(ahat, x, params_.at("gcn1/weight"), params_.at("gcn1/bias")));
    Tensor<S> h2 = relu(graph_conv(ahat, h1, params_.at("gcn2/weight"), params_.at("gcn2/bias")));

    std::vector<Tensor<S>> node_parts{h2};
    if (cfg_.edge_input_mode == EdgeInputMode::GcnPlusRaw) node_parts.push_back(x);
    if (cfg_.uses_image()) node_parts.push_back(image_features(t, g));
    Tensor<S> per_node = node_parts.size() == 1 ? node_parts[0] : concat_cols<S>(node_parts);

    std::vector<Index> us, vs;
    us.reserve(g.edges.size());
    vs.reserve(g.edges.size());
    for (const auto& e : g.edges) {
      us.push_back(row_of.at(e.src));
      vs.push_back(row_of.at(e.dst));
    }
    Tensor<S> fu = gather_rows(per_node, us);
    Tensor<S> fv = gather_rows(per_node, vs);
    return {mlp_head(concat_cols<S>({fu, fv})), mlp_head(concat_cols<S>({fv, fu}))};
  }

  // Per-edge positive probability, aligned with g.edges. Exactly symmetric in
  // edge orientation: the mean of the two softmaxes does not depend on which
  // endpoint came first.
  std::vector<double> forward(const TableInstance& t, const CellGraph& g) const {
    EdgeActivations<S> act = edge_logits(t, g);
    const Index m = act.logits_uv.dim(0);
    std::vector<double> probs(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      probs[static_cast<std::size_t>(i)] =
          0.5 * (positive_prob(act.logits_uv, i) + positive_prob(act.logits_vu, i));
    }
    return probs;
  }

 private:
  GfteModel(ModelConfig cfg, Vocabulary vocab, ParamSet<S> params)
      : cfg_(std::move(cfg)), vocab_(std::move(vocab)), params_(std::move(params)) {}

  static Vocabulary cfg_vocab(const ModelConfig& cfg, const Vocabulary& vocab) {
    return cfg.uses_text() ? vocab : Vocabulary{};
  }

  Tensor<S> mlp_head(const Tensor<S>& edge_in) const {
    Tensor<S> hidden = relu(dense(edge_in, params_.at("mlp1/weight"), params_.at("mlp1/bias")));
    return dense(hidden, params_.at("mlp2/weight"), params_.at("mlp2/bias"));
  }

  Tensor<S> image_features(const TableInstance& t, const CellGraph& g) const {
    Grayscale pre = preprocess_image(t.image);
    std::vector<S> img_data(static_cast<std::size_t>(pre.size()));
    for (Index i = 0; i < pre.rows(); ++i)
      for (Index j = 0; j < pre.cols(); ++j)
        img_data[static_cast<std::size_t>(i * pre.cols() + j)] = static_cast<S>(pre(i, j));
    Tensor<S> img = Tensor<S>::from_data(Shape{1, pre.rows(), pre.cols()}, img_data);
    Tensor<S> f1 = relu(conv2d(img, params_.at("conv1/weight"), params_.at("conv1/bias"), 2, 1));
    Tensor<S> f2 = relu(conv2d(f1, params_.at("conv2/weight"), params_.at("conv2/bias"), 2, 1));
    Tensor<S> f3 = relu(conv2d(f2, params_.at("conv3/weight"), params_.at("conv3/bias"), 2, 1));
    std::vector<std::array<double, 2>> points;
    points.reserve(g.nodes.size());
    for (const auto& nd : g.nodes) points.push_back({nd.rel_cx, nd.rel_cy});
    return grid_sample(f3, points);
  }

  static double positive_prob(const Tensor<S>& logits, Index row) {
    const S a = logits.value()[row * 2], b = logits.value()[row * 2 + 1];
    const S mx = std::max(a, b);
    const S ea = std::exp(a - mx), eb = std::exp(b - mx);
    return static_cast<double>(eb / (ea + eb));
  }

  ModelConfig cfg_;
  Vocabulary vocab_;
  ParamSet<S> params_;
};

// Applies the per-direction thresholds to one graph. Both checkpoints must
// agree on K and (when text is in play) the vocabulary.
template <typename S>
std::vector<EdgeSample> predict_relations(const GfteModel<S>& model_h, const GfteModel<S>& model_v,
                                          const TableInstance& t, const CellGraph& g) {
  if (model_h.config().direction != Direction::Horizontal ||
      model_v.config().direction != Direction::Vertical)
    throw UsageError("predict_relations: models must be (horizontal, vertical), got (" +
                     to_string(model_h.config().direction) + ", " +
                     to_string(model_v.config().direction) + ")");
  if (model_h.config().k != model_v.config().k)
    throw UsageError("predict_relations: models disagree on k");
  if (model_h.config().uses_text() && model_v.config().uses_text() &&
      model_h.config().vocab_fingerprint != model_v.config().vocab_fingerprint)
    throw DataError("predict_relations: vocab fingerprint mismatch between directions");

  std::vector<double> ph = model_h.forward(t, g);
  std::vector<double> pv = model_v.forward(t, g);
  std::vector<EdgeSample> out = g.edges;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].label_h = ph[i] >= model_h.config().threshold;
    out[i].label_v = pv[i] >= model_v.config().threshold;
  }
  return out;
}

}  // namespace gfte
