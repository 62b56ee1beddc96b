#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gfte/model.hpp"

namespace gfte {

// Everything needed to reproduce a training run from a dataset directory and
// a seed. The embedded ModelConfig's direction field is ignored: train() runs
// one horizontal and one vertical model from the same config.
struct TrainConfig {
  ModelConfig model;

  int epochs = 30;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  // Early stop after this many epochs without a new best holdout accuracy.
  // 0 disables early stopping.
  int patience = 0;

  // Fraction of tables held out for per-epoch evaluation. The split is
  // rounded to the nearest table but always leaves at least one table for
  // training. When the holdout ends up empty (tiny datasets), evaluation
  // falls back to the training set.
  double holdout_fraction = 0.1;

  // Weight the cross-entropy classes by inverse frequency on the training
  // edges. Off by default; the KNN graphs are not wildly imbalanced.
  bool class_weights = false;

  std::uint64_t seed = 1;

  // Recorded in reports only; tables are passed in already loaded.
  std::string dataset_dir;

  void validate() const;

  // Flat key/value schema: model knobs and optimizer knobs side by side.
  // Missing keys keep their defaults; unknown keys are rejected. direction and
  // vocab_fingerprint are not part of it (train() decides both), and
  // dataset_dir travels as a flag, not a config key.
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
  static TrainConfig from_file(const std::string& path);
};

struct EpochStat {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
};

struct TrainResult {
  GfteModel<float> model;
  std::vector<EpochStat> curve;
  int best_epoch = 0;       // epoch whose weights the model carries
  double best_accuracy = 0.0;
  bool stopped_early = false;
};

struct TrainOutput {
  TrainResult horizontal;
  TrainResult vertical;
  Vocabulary vocab;
  // Indices into the table vector passed to train(), in shuffled order.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> holdout_indices;
};

// Trains one model per direction on the given tables. Tables are expected to
// have passed dataset validation (in particular, at least two cells each).
TrainOutput train(const TrainConfig& cfg, const std::vector<TableInstance>& tables);

// Single-direction run against an explicit train/eval split; train() is a
// thin wrapper around two of these.
TrainResult train_direction(const TrainConfig& cfg, Direction dir,
                            const std::vector<const TableInstance*>& train_tables,
                            const std::vector<const TableInstance*>& eval_tables,
                            const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Evaluation. Predictors hide where edge decisions come from so the metric
// code is shared between trained models, the ground-truth oracle, and the
// trivial constant baselines.

class EdgePredictor {
 public:
  virtual ~EdgePredictor() = default;
  // Returns one labeled edge per edge of g, in g.edges order. The graph
  // is passed unlabelled; implementations must not rely on its labels.
  virtual std::vector<EdgeSample> predict(const TableInstance& t,
                                                  const CellGraph& g) const = 0;
  virtual std::string describe() const = 0;
  virtual int k() const = 0;  // neighbour count for candidate graphs
};

class ModelPredictor final : public EdgePredictor {
 public:
  ModelPredictor(GfteModel<float> horizontal, GfteModel<float> vertical);
  std::vector<EdgeSample> predict(const TableInstance& t,
                                          const CellGraph& g) const override;
  std::string describe() const override;
  int k() const override { return horizontal_.config().k; }

  const GfteModel<float>& horizontal() const { return horizontal_; }
  const GfteModel<float>& vertical() const { return vertical_; }

 private:
  GfteModel<float> horizontal_;
  GfteModel<float> vertical_;
};

// Copies ground truth; the ceiling any model is measured against.
class OraclePredictor final : public EdgePredictor {
 public:
  explicit OraclePredictor(int k) : k_(k) {}
  std::vector<EdgeSample> predict(const TableInstance& t,
                                          const CellGraph& g) const override;
  std::string describe() const override { return "oracle"; }
  int k() const override { return k_; }

 private:
  int k_;
};

// Answers every edge with fixed labels; the floor.
class ConstantPredictor final : public EdgePredictor {
 public:
  ConstantPredictor(bool same_row, bool same_col, int k)
      : same_row_(same_row), same_col_(same_col), k_(k) {}
  std::vector<EdgeSample> predict(const TableInstance& t,
                                          const CellGraph& g) const override;
  std::string describe() const override;
  int k() const override { return k_; }

 private:
  bool same_row_;
  bool same_col_;
  int k_;
};

struct DirectionMetrics {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  double precision() const;  // 0 when no positive predictions
  double recall() const;     // 0 when no positive truths
};

struct TableBreakdown {
  std::string source_id;
  std::int64_t edges = 0;
  std::int64_t correct_h = 0;
  std::int64_t correct_v = 0;
};

struct EvalReport {
  DirectionMetrics horizontal;  // micro-averaged over all edges
  DirectionMetrics vertical;
  std::vector<TableBreakdown> per_table;
  double macro_h = 0.0;  // mean of per-table accuracies
  double macro_v = 0.0;
  std::int64_t tables = 0;
  bool complete_graphs = false;
  int k = 0;
  std::string predictor;
  std::string dataset_fingerprint;  // optional, filled by callers that know it
};

// Evaluates a predictor on the given tables. Candidate edges come from the
// predictor's k unless complete_graphs asks for all pairs. jobs > 1 spreads
// tables across threads; the report is identical either way.
EvalReport evaluate(const EdgePredictor& predictor,
                    const std::vector<const TableInstance*>& tables,
                    bool complete_graphs = false, int jobs = 1);

// ---------------------------------------------------------------------------
// Feature ablation: trains the three variants with identical seeds and data
// and reports holdout accuracy per direction.

struct AblationRow {
  Variant variant = Variant::Pos;
  double accuracy_h = 0.0;
  double accuracy_v = 0.0;
  int best_epoch_h = 0;
  int best_epoch_v = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;  // Pos, PosText, Full in that order
  std::int64_t holdout_tables = 0;
  std::string config_fingerprint;  // of the Pos row's horizontal model
};

AblationReport run_ablation(const TrainConfig& cfg, const std::vector<TableInstance>& tables);

}  // namespace gfte
