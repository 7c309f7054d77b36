// marlids: preprocess flows, train the agent ensemble, evaluate, predict and adapt.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marlids/commands.hpp"
#include "marlids/errors.hpp"
#include "marlids/synthetic.hpp"

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kIncompatible = 3 };

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& out_help, bool out_required) {
  cmd->add_option("--config", o.config, "JSON run configuration (default: $" + std::string(marlids::kConfigEnvVar) + ")");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--threads", o.threads, "Worker threads for L1 agent sweeps");
  cmd->add_option("--set", o.overrides, "Override one config value, e.g. hyperparameters.episodes=30")
      ->type_name("KEY=VALUE");
  auto* out = cmd->add_option("--out", o.out, out_help);
  if (out_required) out->required();
}

marlids::RunConfig resolve_config(const CommonOptions& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv(marlids::kConfigEnvVar); env != nullptr) path = env;
  }
  marlids::RunConfig cfg = path.empty() ? marlids::RunConfig{} : marlids::RunConfig::load(path);
  for (const auto& s : o.overrides) cfg.apply_override(s);
  if (o.seed) cfg.training.seed = *o.seed;
  if (o.threads) cfg.training.threads = *o.threads;
  cfg.validate();
  return cfg;
}

// Adapt starts from the configuration embedded in the model, so --seed and
// --threads are forwarded as overrides on top of it.
std::vector<std::string> adapt_overrides(const CommonOptions& o) {
  std::vector<std::string> out = o.overrides;
  if (o.seed) out.push_back("seed=" + std::to_string(*o.seed));
  if (o.threads) out.push_back("threads=" + std::to_string(*o.threads));
  return out;
}

std::vector<marlids::ClassSpec> parse_class_specs(const std::vector<std::string>& specs) {
  std::vector<marlids::ClassSpec> out;
  for (const auto& s : specs) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0) throw marlids::ValidationError("class spec '" + s + "' is not LABEL:COUNT");
    out.push_back({s.substr(0, colon), static_cast<std::size_t>(std::stoull(s.substr(colon + 1)))});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent deep Q-learning intrusion detection"};
  app.require_subcommand(1);

  CommonOptions pre_opts;
  std::vector<std::string> pre_inputs;
  auto* pre = app.add_subcommand("preprocess", "Clean, split and normalise flow CSV files");
  pre->add_option("inputs", pre_inputs, "Flow CSV files")->required();
  add_common(pre, pre_opts, "Output directory", true);

  CommonOptions train_opts;
  std::string train_data, train_log;
  auto* train = app.add_subcommand("train", "Train the L1 agents and the decider");
  train->add_option("train", train_data, "Training container (.mids)")->required();
  train->add_option("--log", train_log, "Training log path (default: <out>.log.jsonl)");
  add_common(train, train_opts, "Model output path", true);

  CommonOptions eval_opts;
  std::string eval_model, eval_data;
  bool eval_allow_unknown = false;
  auto* eval = app.add_subcommand("evaluate", "Score a model on a test container");
  eval->add_option("model", eval_model, "Model file")->required();
  eval->add_option("test", eval_data, "Test container (.mids)")->required();
  eval->add_flag("--allow-unknown-labels", eval_allow_unknown, "Score labels missing from the model as always wrong");
  add_common(eval, eval_opts, "Report directory", true);

  CommonOptions pred_opts;
  std::string pred_model, pred_csv, pred_record;
  auto* pred = app.add_subcommand("predict", "Classify raw flow rows");
  pred->add_option("model", pred_model, "Model file")->required();
  auto* pred_csv_opt = pred->add_option("--csv", pred_csv, "CSV file with a header row");
  auto* pred_rec_opt = pred->add_option("--record", pred_record, "One delimiter-separated row of raw features");
  pred_csv_opt->excludes(pred_rec_opt);
  add_common(pred, pred_opts, "Output CSV (default: standard output)", false);

  CommonOptions adapt_opts;
  marlids::AdaptRequest adapt_req;
  std::string adapt_prev, adapt_held, adapt_log;
  std::vector<std::string> adapt_agents;
  std::size_t adapt_episodes = 0;
  auto* adapt = app.add_subcommand("adapt", "Retrain only the affected agents on new data");
  adapt->add_option("model", adapt_req.model, "Model file")->required();
  adapt->add_option("new_data", adapt_req.new_data, "Container with the new flows")->required();
  adapt->add_option("--agents", adapt_agents, "Affected attack labels")->required();
  adapt->add_option("--previous-train", adapt_prev, "Training container of the existing model");
  adapt->add_flag("--new-label", adapt_req.allow_new_labels, "Allow affected labels that are not yet registered");
  auto* ep_opt = adapt->add_option("--episodes", adapt_episodes, "Adaptation episodes (default 20)");
  adapt->add_option("--held-out", adapt_held, "Write the unused share of the new data here");
  adapt->add_option("--log", adapt_log, "Adaptation log path");
  add_common(adapt, adapt_opts, "Updated model path", true);

  std::string synth_out;
  std::vector<std::string> synth_classes;
  marlids::SyntheticOptions synth_cfg;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster flow CSV");
  synth->add_option("--class", synth_classes, "LABEL:COUNT, repeatable")->required();
  synth->add_option("--features", synth_cfg.feature_dim, "Feature count");
  synth->add_option("--separation", synth_cfg.separation, "Distance of class centres from the origin");
  synth->add_option("--noise", synth_cfg.noise, "Per-feature standard deviation");
  synth->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth->add_option("--out", synth_out, "CSV output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      std::vector<std::filesystem::path> paths(pre_inputs.begin(), pre_inputs.end());
      marlids::cmd_preprocess(paths, resolve_config(pre_opts), pre_opts.out, std::cerr);
    } else if (train->parsed()) {
      const std::string log = train_log.empty() ? train_opts.out + ".log.jsonl" : train_log;
      marlids::cmd_train(train_data, resolve_config(train_opts), train_opts.out, log, std::cerr);
    } else if (eval->parsed()) {
      marlids::cmd_evaluate(eval_model, eval_data, eval_opts.out, eval_allow_unknown, std::cout);
    } else if (pred->parsed()) {
      marlids::PredictInput input;
      if (*pred_csv_opt) input.csv = pred_csv;
      if (*pred_rec_opt) input.record = pred_record;
      const auto data_cfg = resolve_config(pred_opts).data;
      std::size_t failures = 0;
      if (pred_opts.out.empty()) {
        failures = marlids::cmd_predict(pred_model, input, data_cfg, std::cout, std::cerr);
      } else {
        std::ofstream out(pred_opts.out, std::ios::binary);
        if (!out) throw marlids::IoError("cannot open '" + pred_opts.out + "' for writing");
        failures = marlids::cmd_predict(pred_model, input, data_cfg, out, std::cerr);
      }
      if (failures > 0) {
        std::cerr << "error: " << failures << " row(s) could not be classified\n";
        return kValidation;
      }
    } else if (adapt->parsed()) {
      adapt_req.affected = {adapt_agents.begin(), adapt_agents.end()};
      if (!adapt_prev.empty()) adapt_req.previous_train = adapt_prev;
      if (*ep_opt) adapt_req.episodes = adapt_episodes;
      if (!adapt_held.empty()) adapt_req.held_out_out = adapt_held;
      if (!adapt_log.empty()) adapt_req.log_out = adapt_log;
      adapt_req.model_out = adapt_opts.out;
      const auto diff = marlids::cmd_adapt(adapt_req, adapt_overrides(adapt_opts), std::cerr);
      std::cout << diff.dump(2) << '\n';
    } else if (synth->parsed()) {
      const auto ds = marlids::make_gaussian_flows(parse_class_specs(synth_classes), synth_cfg);
      marlids::write_flows_csv(ds, synth_out);
    }
  } catch (const marlids::IncompatibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIncompatible;
  } catch (const marlids::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
