#include "marlids/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "marlids/binary_io.hpp"
#include "marlids/errors.hpp"
#include "marlids/model_io.hpp"
#include "marlids/report.hpp"

namespace marlids {

using nlohmann::json;

PreprocessResult preprocess(const std::vector<std::filesystem::path>& inputs, const RunConfig& config) {
  config.validate();
  const auto& dc = config.data;
  const auto seed = config.training.seed;
  LoadOptions opts;
  opts.delimiter = dc.delimiter;
  opts.label_column = dc.label_column;
  opts.drop_columns = dc.drop_columns;

  const Dataset raw = load_flows(inputs, opts);
  const auto total_counts = raw.label_counts();
  Dataset ds = clean(raw);
  const auto cleaned_counts = ds.label_counts();

  const auto benign_it = cleaned_counts.find(dc.benign_label);
  if (dc.benign_downsample_target && benign_it != cleaned_counts.end() &&
      benign_it->second > *dc.benign_downsample_target) {
    ds = downsample_label(ds, dc.benign_label, *dc.benign_downsample_target,
                          MarlEnsemble::derive_seed(seed, "downsample"));
  }
  const auto kept_counts = ds.label_counts();

  std::optional<Dataset> excluded;
  if (!dc.exclude_labels.empty()) {
    auto [kept, held] = exclude_labels(ds, {dc.exclude_labels.begin(), dc.exclude_labels.end()});
    ds = std::move(kept);
    excluded = std::move(held);
  }
  auto [train, test] = split(ds, dc.train_fraction, MarlEnsemble::derive_seed(seed, "split"));
  const auto train_counts = train.label_counts();
  const auto test_counts = test.label_counts();

  if (!dc.label_grouping.empty()) {
    train = regroup_labels(train, dc.label_grouping);
    test = regroup_labels(test, dc.label_grouping);
    if (excluded) excluded = regroup_labels(*excluded, dc.label_grouping);
  }
  const ZScoreParams params = fit_zscore(train);

  auto count_of = [](const std::map<std::string, std::size_t>& m, const std::string& l) -> std::size_t {
    auto it = m.find(l);
    return it == m.end() ? 0 : it->second;
  };
  std::vector<std::pair<std::string, std::size_t>> by_size(total_counts.begin(), total_counts.end());
  std::stable_sort(by_size.begin(), by_size.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json classes = json::array();
  for (const auto& [label, total] : by_size) {
    const std::size_t kept = count_of(kept_counts, label);
    const std::size_t tr = count_of(train_counts, label);
    const std::size_t te = count_of(test_counts, label);
    classes.push_back({{"label", label},
                       {"total", total},
                       {"preprocessed", count_of(cleaned_counts, label)},
                       {"training", tr},
                       {"testing", te},
                       {"excluded", kept - tr - te}});
  }
  PreprocessResult result;
  result.summary = {{"classes", classes},
                    {"training_total", train.size()},
                    {"testing_total", test.size()},
                    {"grouped_training", train.label_counts()},
                    {"grouped_testing", test.label_counts()},
                    {"config", config.to_json()}};
  result.train = {apply_zscore(train, params), params};
  result.test = {apply_zscore(test, params), params};
  if (excluded) result.excluded = DatasetContainer{apply_zscore(*excluded, params), params};
  return result;
}

std::string render_summary(const json& summary) {
  std::size_t width = 5;
  for (const auto& c : summary.at("classes")) width = std::max(width, c.at("label").get<std::string>().size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Class" << std::right << std::setw(12) << "Total"
     << std::setw(14) << "Preprocessed" << std::setw(12) << "Training" << std::setw(12) << "Testing" << '\n';
  for (const auto& c : summary.at("classes")) {
    os << std::left << std::setw(static_cast<int>(width)) << c.at("label").get<std::string>() << std::right
       << std::setw(12) << c.at("total").get<std::size_t>() << std::setw(14)
       << c.at("preprocessed").get<std::size_t>() << std::setw(12) << c.at("training").get<std::size_t>()
       << std::setw(12) << c.at("testing").get<std::size_t>() << '\n';
  }
  return os.str();
}

MarlEnsemble build_ensemble(const DatasetContainer& train, const RunConfig& config) {
  std::vector<std::string> attacks;
  for (const auto& [label, n] : train.data.label_counts()) {
    if (label != config.data.benign_label) attacks.push_back(label);
  }
  if (attacks.empty()) throw ValidationError("training data contains no attack labels");
  return MarlEnsemble(train.data.feature_dim(), LabelRegistry(std::move(attacks), config.data.benign_label),
                      config.training, train.normalization);
}

EvaluationReport evaluate_model(const MarlEnsemble& ensemble, const Dataset& test, bool allow_unknown_labels) {
  if (test.empty()) throw ValidationError("evaluate: empty evaluation set");
  if (test.feature_dim() != ensemble.feature_dim()) {
    throw IncompatibleError("evaluate: data has " + std::to_string(test.feature_dim()) + " features, model expects " +
                            std::to_string(ensemble.feature_dim()));
  }
  const auto& reg = ensemble.registry();
  std::vector<std::string> labels = reg.labels();
  for (const auto& [label, n] : test.label_counts()) {
    if (reg.contains(label)) continue;
    if (!allow_unknown_labels) {
      throw IncompatibleError("evaluate: label '" + label + "' is not in the model registry");
    }
    labels.push_back(label);
  }
  std::vector<std::size_t> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    truth[i] = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), test.records[i].label) - labels.begin());
  }
  std::vector<std::size_t> predicted(test.size());
  std::vector<std::vector<double>> scores(test.size(),
                                          std::vector<double>(labels.size(), std::numeric_limits<double>::quiet_NaN()));
  const Eigen::MatrixXf features = to_feature_matrix(test);
  constexpr Eigen::Index kChunk = 8192;
  for (Eigen::Index start = 0; start < features.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, features.cols() - start);
    const auto preds = ensemble.predict_batch(Eigen::MatrixXf(features.middleCols(start, n)));
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto i = static_cast<std::size_t>(start + j);
      const auto& p = preds[static_cast<std::size_t>(j)];
      predicted[i] = p.action;
      for (std::size_t c = 0; c < p.q_values.size(); ++c) scores[i][c] = p.q_values[c];
    }
  }
  return evaluate(truth, predicted, labels, scores);
}

void write_training_log(const TrainingLog& log, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& e : log) {
    os << json{{"episode", e.episode},
               {"agent", e.agent},
               {"mean_loss", e.mean_loss},
               {"mean_reward", e.mean_reward},
               {"epsilon", e.epsilon},
               {"samples", e.samples}}
              .dump()
       << '\n';
  }
  binary::write_file(path, os.str());
}

std::vector<json> read_json_lines(const std::filesystem::path& path) {
  std::istringstream in(binary::read_file(path));
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

void cmd_preprocess(const std::vector<std::filesystem::path>& inputs, const RunConfig& config,
                    const std::filesystem::path& out_dir, std::ostream& log) {
  for (const auto& p : inputs) {
    if (!std::filesystem::exists(p)) throw IoError("input '" + p.string() + "' does not exist");
  }
  const auto result = preprocess(inputs, config);
  std::filesystem::create_directories(out_dir);
  write_dataset(out_dir / "train.mids", result.train);
  write_dataset(out_dir / "test.mids", result.test);
  if (result.excluded) write_dataset(out_dir / "excluded.mids", *result.excluded);
  binary::write_file(out_dir / "summary.json", result.summary.dump(2) + "\n");
  binary::write_file(out_dir / "summary.txt", render_summary(result.summary));
  binary::write_file(out_dir / "config.json", config.to_json().dump(2) + "\n");
  log << render_summary(result.summary);
  log << "train records: " << result.train.data.size() << ", test records: " << result.test.data.size() << '\n';
}

void cmd_train(const std::filesystem::path& train_container, const RunConfig& config,
               const std::filesystem::path& model_out, const std::filesystem::path& log_out, std::ostream& log) {
  config.validate();
  const auto train = read_dataset(train_container);
  if (train.data.empty()) throw ValidationError("training container is empty");
  MarlEnsemble ensemble = build_ensemble(train, config);
  if (config.training.episodes == 0) {
    log << "warning: episodes = 0, the model keeps its initial weights\n";
  }
  if (config.training.agent.minibatch_size > train.data.size()) {
    log << "warning: minibatch_size " << config.training.agent.minibatch_size
        << " exceeds the training set; each step uses the whole replay occupancy\n";
  }
  const TrainingLog training_log = train_all(ensemble, train.data, config.training);
  save_model(ensemble, model_out);
  write_training_log(training_log, log_out);
  log << "agents: " << ensemble.num_agents() << " + decider, episodes: " << config.training.episodes << '\n';
  log << "model digest: " << model_digest(ensemble) << '\n';
}

void cmd_evaluate(const std::filesystem::path& model, const std::filesystem::path& test_container,
                  const std::filesystem::path& out_dir, bool allow_unknown_labels, std::ostream& log) {
  const MarlEnsemble ensemble = load_model(model);
  const auto test = read_dataset(test_container);
  if (!ensemble.normalization().empty() && !test.normalization.empty() &&
      !(ensemble.normalization() == test.normalization)) {
    throw IncompatibleError("evaluate: container was normalised with different parameters than the model");
  }
  const auto report = evaluate_model(ensemble, test.data, allow_unknown_labels);
  std::filesystem::create_directories(out_dir);
  const auto text = render_text(report);
  binary::write_file(out_dir / "report.txt", text);
  json report_json = report_to_json(report);
  report_json["config"] = training_config_to_json(ensemble.config());
  binary::write_file(out_dir / "report.json", report_json.dump(2) + "\n");
  binary::write_file(out_dir / "confusion.csv", confusion_csv(report.confusion));
  binary::write_file(out_dir / "roc.csv", roc_csv(report));
  log << text;
}

namespace {

std::vector<std::string_view> split_cells(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return cells;
    start = pos + 1;
  }
}

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

}  // namespace

std::size_t cmd_predict(const std::filesystem::path& model, const PredictInput& input, const DataConfig& data,
                        std::ostream& out, std::ostream& log) {
  const MarlEnsemble ensemble = load_model(model);
  const auto& norm = ensemble.normalization();
  const std::size_t dim = ensemble.feature_dim();

  std::vector<std::string> lines;
  std::vector<bool> feature_mask;  // by column; empty means every column is a feature
  if (input.record) {
    lines.push_back(*input.record);
  } else if (input.csv) {
    std::istringstream in(binary::read_file(*input.csv));
    std::string header;
    if (!std::getline(in, header)) throw IoError("predict: '" + input.csv->string() + "' has no header row");
    for (auto cell : split_cells(header, data.delimiter)) {
      const auto name = trimmed(cell);
      const bool skip = name == data.label_column ||
                        std::find(data.drop_columns.begin(), data.drop_columns.end(), name) != data.drop_columns.end();
      feature_mask.push_back(!skip);
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!trimmed(line).empty()) lines.push_back(line);
    }
  } else {
    throw ValidationError("predict: no input given");
  }

  out << "row,label";
  for (const auto& l : ensemble.registry().labels()) out << ",q_" << l;
  out << '\n';
  std::size_t failures = 0;
  std::vector<float> features(dim);
  for (std::size_t row = 0; row < lines.size(); ++row) {
    const auto cells = split_cells(lines[row], data.delimiter);
    std::vector<double> values;
    std::string problem;
    if (!feature_mask.empty() && cells.size() != feature_mask.size()) {
      problem = "expected " + std::to_string(feature_mask.size()) + " columns, found " + std::to_string(cells.size());
    }
    for (std::size_t c = 0; problem.empty() && c < cells.size(); ++c) {
      if (!feature_mask.empty() && !feature_mask[c]) continue;
      const double v = parse_flow_value(cells[c]);
      if (!std::isfinite(v)) problem = "column " + std::to_string(c) + " is not a finite number";
      values.push_back(v);
    }
    if (problem.empty() && values.size() != dim) {
      problem = "expected " + std::to_string(dim) + " features, found " + std::to_string(values.size());
    }
    if (!problem.empty()) {
      log << "row " << row << ": " << problem << '\n';
      ++failures;
      continue;
    }
    if (!norm.empty()) norm.apply(values);
    std::transform(values.begin(), values.end(), features.begin(), [](double v) { return static_cast<float>(v); });
    const auto p = ensemble.predict(features);
    out << row << ',' << p.label;
    out << std::setprecision(9);
    for (float q : p.q_values) out << ',' << q;
    out << '\n';
  }
  return failures;
}

json cmd_adapt(const AdaptRequest& request, const std::vector<std::string>& overrides, std::ostream& log) {
  MarlEnsemble ensemble = load_model(request.model);
  RunConfig config;
  config.training = ensemble.config();
  config.data.benign_label = ensemble.registry().benign_label();
  for (const auto& o : overrides) config.apply_override(o);
  config.validate();

  for (const auto& label : request.affected) {
    if (!ensemble.registry().is_attack(label) && !request.allow_new_labels) {
      throw ValidationError("adapt: '" + label + "' is not a registered attack (pass the new-label flag to add it)");
    }
  }
  const auto new_data = read_dataset(request.new_data);
  Dataset previous;
  if (request.previous_train) {
    previous = read_dataset(*request.previous_train).data;
  } else {
    log << "warning: no previous training set given; adapting on new data only\n";
  }
  AdaptOptions options = config.adapt;
  options.allow_new_labels = request.allow_new_labels;
  if (request.episodes) options.episodes = *request.episodes;

  const auto before = ensemble.agent_digests();
  const auto result = adapt(ensemble, previous, new_data.data, request.affected, config.training, options);
  const auto after = ensemble.agent_digests();
  save_model(ensemble, request.model_out);
  if (request.held_out_out) write_dataset(*request.held_out_out, {result.held_out, new_data.normalization});
  if (request.log_out) write_training_log(result.log, *request.log_out);

  json diff = json::object();
  for (const auto& [agent, digest] : after) {
    auto it = before.find(agent);
    const std::string old = it == before.end() ? "" : it->second;
    const std::string status = it == before.end() ? "added" : (old == digest ? "unchanged" : "changed");
    diff[agent] = {{"before", old}, {"after", digest}, {"status", status}};
    log << std::left << std::setw(24) << agent << ' ' << status << '\n';
  }
  log << "adapted for " << options.episodes << " episodes; model digest: " << model_digest(ensemble) << '\n';
  return diff;
}

}  // namespace marlids
