#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace marlids {

/// One flow: feature vector plus class label. Missing or unparsable cells are
/// held as NaN until clean() drops the record.
struct FlowRecord {
  std::vector<double> features;
  std::string label;

  bool operator==(const FlowRecord&) const = default;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<FlowRecord> records;
  /// Ordered log of the transforms that produced this dataset.
  std::vector<std::string> provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::size_t feature_dim() const { return feature_names.size(); }
  std::map<std::string, std::size_t> label_counts() const;
  std::vector<std::string> labels() const;
};

/// Population mean and standard deviation per feature, fitted on a training split.
struct ZScoreParams {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const { return mean.size(); }
  bool empty() const { return mean.empty(); }
  bool is_constant(std::size_t feature) const { return stddev.at(feature) == 0.0; }
  /// Zero-variance features map to 0.
  void apply(std::span<double> features) const;
  bool operator==(const ZScoreParams&) const = default;
};

struct LoadOptions {
  char delimiter = ',';
  std::string label_column = "Label";
  /// Header names (after trimming) skipped entirely, e.g. identifiers or timestamps.
  std::vector<std::string> drop_columns;
};

/// Parses one cell: empty and unparsable cells give NaN, "Infinity"-style
/// tokens give +-inf.
double parse_flow_value(std::string_view cell);

/// Delimiter-separated files with a header row; all files must share the header.
Dataset load_flows(const std::vector<std::filesystem::path>& paths, const LoadOptions& options = {});

/// Drops every record with a non-finite or missing feature.
Dataset clean(const Dataset& ds);

ZScoreParams fit_zscore(const Dataset& train);
Dataset apply_zscore(const Dataset& ds, const ZScoreParams& params);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t test = 0;
};

/// Per-class train/test sizes of a stratified split: n_train =
/// floor(fraction * total) is shared out proportionally by largest remainder
/// (ties go to the class first in label order).
std::map<std::string, SplitCounts> stratified_split_counts(const std::map<std::string, std::size_t>& class_counts,
                                                           double train_fraction);

/// Stratified split with the counts above; records keep their relative order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Uniform random subsample of one label down to target_count records.
Dataset downsample_label(const Dataset& ds, const std::string& label, std::size_t target_count, std::uint64_t seed);

Dataset regroup_labels(const Dataset& ds, const std::map<std::string, std::string>& grouping);

/// (records without the labels, records with them).
std::pair<Dataset, Dataset> exclude_labels(const Dataset& ds, const std::set<std::string>& labels);

/// Records of a followed by records of b; feature names must agree.
Dataset concat(const Dataset& a, const Dataset& b);

/// The seven-group mapping of CIC-IDS-2017 attack labels, benign unchanged.
std::map<std::string, std::string> cicids2017_default_grouping();

}  // namespace marlids
