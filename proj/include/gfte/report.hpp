#pragma once

#include <string>

#include "gfte/train.hpp"

namespace gfte {

// Machine-readable report; per_table can be dropped for large runs.
std::string eval_report_to_json(const EvalReport& r, bool per_table = true);

// Aligned text summary, one row per direction.
std::string format_eval_report(const EvalReport& r);

std::string ablation_to_json(const AblationReport& r);
std::string format_ablation(const AblationReport& r);

// epoch,direction,train_loss,eval_accuracy rows for both directions.
std::string loss_curves_csv(const TrainResult& horizontal, const TrainResult& vertical);

}  // namespace gfte
