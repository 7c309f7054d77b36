#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "marlids/dataset_io.hpp"
#include "marlids/ensemble.hpp"
#include "marlids/metrics.hpp"
#include "marlids/run_config.hpp"

namespace marlids {

/// In-memory result of load -> clean -> downsample -> exclude -> split ->
/// regroup -> fit/apply z-score.
struct PreprocessResult {
  DatasetContainer train;
  DatasetContainer test;
  std::optional<DatasetContainer> excluded;
  nlohmann::json summary;  // per-class counts: total, preprocessed, training, testing
};

PreprocessResult preprocess(const std::vector<std::filesystem::path>& inputs, const RunConfig& config);

/// Human-readable per-class count table of a preprocess summary.
std::string render_summary(const nlohmann::json& summary);

/// Ensemble with one L1 agent per attack label present in `train` (sorted).
MarlEnsemble build_ensemble(const DatasetContainer& train, const RunConfig& config);

/// Greedy predictions plus decider Q-scores. Labels missing from the model
/// registry are appended to the evaluation labels when allow_unknown_labels
/// is set, otherwise they raise IncompatibleError.
EvaluationReport evaluate_model(const MarlEnsemble& ensemble, const Dataset& test, bool allow_unknown_labels = false);

void write_training_log(const TrainingLog& log, const std::filesystem::path& path);
std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);

// Command entry points. Each writes its primary outputs to disk and progress
// or warnings to `log`; errors propagate as exceptions.

void cmd_preprocess(const std::vector<std::filesystem::path>& inputs, const RunConfig& config,
                    const std::filesystem::path& out_dir, std::ostream& log);

void cmd_train(const std::filesystem::path& train_container, const RunConfig& config,
               const std::filesystem::path& model_out, const std::filesystem::path& log_out, std::ostream& log);

void cmd_evaluate(const std::filesystem::path& model, const std::filesystem::path& test_container,
                  const std::filesystem::path& out_dir, bool allow_unknown_labels, std::ostream& log);

struct PredictInput {
  std::optional<std::filesystem::path> csv;
  std::optional<std::string> record;  // one delimiter-separated row of raw features
};

/// Streams "row,label,q_<label>..." lines to `out`; row-level failures go to
/// `log`. Returns the number of failed rows.
std::size_t cmd_predict(const std::filesystem::path& model, const PredictInput& input, const DataConfig& data,
                        std::ostream& out, std::ostream& log);

struct AdaptRequest {
  std::filesystem::path model;
  std::filesystem::path new_data;
  std::optional<std::filesystem::path> previous_train;
  std::set<std::string> affected;
  bool allow_new_labels = false;
  std::optional<std::size_t> episodes;
  std::filesystem::path model_out;
  std::optional<std::filesystem::path> held_out_out;
  std::optional<std::filesystem::path> log_out;
};

/// Returns the digest diff: agent -> {"before", "after", "status"}.
nlohmann::json cmd_adapt(const AdaptRequest& request, const std::vector<std::string>& overrides, std::ostream& log);

}  // namespace marlids
