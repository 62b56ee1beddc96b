#include "gfte/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace gfte {

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json metrics_json(const DirectionMetrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy();
  j["precision"] = m.precision();
  j["recall"] = m.recall();
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  return j;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& r, bool per_table) {
  nlohmann::json j;
  j["horizontal"] = metrics_json(r.horizontal);
  j["vertical"] = metrics_json(r.vertical);
  j["macro"] = {{"horizontal", r.macro_h}, {"vertical", r.macro_v}};
  j["tables"] = r.tables;
  j["graph"] = r.complete_graphs ? "complete" : "knn";
  j["k"] = r.k;
  j["predictor"] = r.predictor;
  if (!r.dataset_fingerprint.empty()) j["dataset_fingerprint"] = r.dataset_fingerprint;
  if (per_table) {
    auto& rows = j["per_table"] = nlohmann::json::array();
    for (const auto& t : r.per_table) {
      rows.push_back({{"source_id", t.source_id},
                      {"edges", t.edges},
                      {"correct_h", t.correct_h},
                      {"correct_v", t.correct_v}});
    }
  }
  return j.dump(2) + "\n";
}

std::string format_eval_report(const EvalReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-11s %9s %10s %9s %9s %9s %7s %7s\n", "direction",
                "accuracy", "precision", "recall", "tp", "tn", "fp", "fn");
  out << line;
  for (const auto& [name, m] :
       {std::pair<const char*, const DirectionMetrics&>{"horizontal", r.horizontal},
        std::pair<const char*, const DirectionMetrics&>{"vertical", r.vertical}}) {
    std::snprintf(line, sizeof(line), "%-11s %9s %10s %9s %9lld %9lld %7lld %7lld\n", name,
                  fixed6(m.accuracy()).c_str(), fixed6(m.precision()).c_str(),
                  fixed6(m.recall()).c_str(), static_cast<long long>(m.tp),
                  static_cast<long long>(m.tn), static_cast<long long>(m.fp),
                  static_cast<long long>(m.fn));
    out << line;
  }
  out << "tables: " << r.tables << "   edges/direction: " << r.horizontal.total()
      << "   macro h: " << fixed6(r.macro_h) << "   macro v: " << fixed6(r.macro_v) << "\n";
  out << "graph: " << (r.complete_graphs ? "complete" : ("knn k=" + std::to_string(r.k))) << "\n";
  out << "predictor: " << r.predictor << "\n";
  if (!r.dataset_fingerprint.empty()) out << "dataset: " << r.dataset_fingerprint << "\n";
  return out.str();
}

std::string ablation_to_json(const AblationReport& r) {
  nlohmann::json j;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"variant", to_string(row.variant)},
                    {"accuracy_h", row.accuracy_h},
                    {"accuracy_v", row.accuracy_v},
                    {"best_epoch_h", row.best_epoch_h},
                    {"best_epoch_v", row.best_epoch_v}});
  }
  j["holdout_tables"] = r.holdout_tables;
  j["config_fingerprint"] = r.config_fingerprint;
  return j.dump(2) + "\n";
}

std::string format_ablation(const AblationReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %16s\n", "variant", "horizontal", "vertical",
                "best epoch h/v");
  out << line;
  for (const auto& row : r.rows) {
    const std::string epochs =
        std::to_string(row.best_epoch_h) + "/" + std::to_string(row.best_epoch_v);
    std::snprintf(line, sizeof(line), "%-10s %10s %10s %16s\n", to_string(row.variant).c_str(),
                  fixed6(row.accuracy_h).c_str(), fixed6(row.accuracy_v).c_str(), epochs.c_str());
    out << line;
  }
  out << "holdout tables: " << r.holdout_tables << "\n";
  out << "config: " << r.config_fingerprint << "\n";
  return out.str();
}

std::string loss_curves_csv(const TrainResult& horizontal, const TrainResult& vertical) {
  std::ostringstream out;
  out << "epoch,direction,train_loss,eval_accuracy\n";
  for (const auto& [dir, res] :
       {std::pair<const char*, const TrainResult&>{"horizontal", horizontal},
        std::pair<const char*, const TrainResult&>{"vertical", vertical}}) {
    for (const auto& s : res.curve)
      out << s.epoch << "," << dir << "," << fixed6(s.train_loss) << ","
          << fixed6(s.eval_accuracy) << "\n";
  }
  return out.str();
}

}  // namespace gfte
