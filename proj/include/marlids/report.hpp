#pragma once

#include <string>

#include <json.hpp>

#include "marlids/metrics.hpp"

namespace marlids {

/// Per-class rows in label order, then the weighted average, accuracy and AUC.
std::string render_text(const EvaluationReport& report);

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// label,threshold,fpr,tpr rows for every defined curve.
std::string roc_csv(const EvaluationReport& report);
/// Header row of predicted labels, one row per true label.
std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace marlids
