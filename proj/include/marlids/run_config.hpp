#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "marlids/ensemble.hpp"

namespace marlids {

struct DataConfig {
  std::string label_column = "Label";
  char delimiter = ',';
  std::string benign_label = "BENIGN";
  /// Benign records are downsampled to this count when there are more; nullopt disables.
  std::optional<std::size_t> benign_downsample_target = 700'000;
  double train_fraction = 0.8;
  /// Applied to both splits after splitting; empty means identity.
  std::map<std::string, std::string> label_grouping;
  std::vector<std::string> drop_columns;
  /// Labels held out of train/test and written to a separate container.
  std::vector<std::string> exclude_labels;
};

/// Every knob of a run. Defaults follow the published hyperparameter table
/// where it gives one.
struct RunConfig {
  TrainingConfig training;
  DataConfig data;
  AdaptOptions adapt;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);

  /// "section.key=value" (or "key=value" for top-level keys); the value is
  /// parsed as JSON, falling back to a plain string.
  void apply_override(std::string_view assignment);
};

inline constexpr const char* kConfigEnvVar = "MARLIDS_CONFIG";

nlohmann::json training_config_to_json(const TrainingConfig& cfg);
TrainingConfig training_config_from_json(const nlohmann::json& j);

}  // namespace marlids
