#include "marlids/run_config.hpp"

#include <set>

#include "marlids/binary_io.hpp"
#include "marlids/errors.hpp"

namespace marlids {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view section) {
  if (!j.is_object()) throw ConfigError("config: section '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + std::string(section) + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

json hyperparameters_json(const TrainingConfig& c) {
  return {{"replay_buffer_size", c.agent.replay_capacity},
          {"minibatch_size", c.agent.minibatch_size},
          {"neurons", c.hidden_layers},
          {"learning_rate", c.agent.adam.learning_rate},
          {"gamma", c.agent.gamma},
          {"epsilon_initial", c.agent.epsilon.initial},
          {"epsilon_decay", c.agent.epsilon.decay_per_episode},
          {"epsilon_floor", c.agent.epsilon.floor},
          {"episodes", c.episodes},
          {"adam_beta1", c.agent.adam.beta1},
          {"adam_beta2", c.agent.adam.beta2},
          {"adam_epsilon", c.agent.adam.epsilon}};
}

json reward_json(const RewardConfig& r) {
  return {{"k", r.k},
          {"l1_weight_agent_class", r.l1_weight_agent_class},
          {"l1_weight_other", r.l1_weight_other},
          {"decider_beta", r.decider_beta},
          {"decider_weight_cap", r.decider_weight_cap},
          {"decider_class_weights", r.decider_class_weights}};
}

void hyperparameters_from(const json& h, TrainingConfig& c) {
  reject_unknown(h, {"replay_buffer_size", "minibatch_size", "neurons", "learning_rate", "gamma", "epsilon_initial",
                     "epsilon_decay", "epsilon_floor", "episodes", "adam_beta1", "adam_beta2", "adam_epsilon"},
                 "hyperparameters");
  read(h, "replay_buffer_size", c.agent.replay_capacity);
  read(h, "minibatch_size", c.agent.minibatch_size);
  read(h, "neurons", c.hidden_layers);
  read(h, "learning_rate", c.agent.adam.learning_rate);
  read(h, "gamma", c.agent.gamma);
  read(h, "epsilon_initial", c.agent.epsilon.initial);
  read(h, "epsilon_decay", c.agent.epsilon.decay_per_episode);
  read(h, "epsilon_floor", c.agent.epsilon.floor);
  read(h, "episodes", c.episodes);
  read(h, "adam_beta1", c.agent.adam.beta1);
  read(h, "adam_beta2", c.agent.adam.beta2);
  read(h, "adam_epsilon", c.agent.adam.epsilon);
}

void reward_from(const json& r, RewardConfig& c) {
  reject_unknown(r, {"k", "l1_weight_agent_class", "l1_weight_other", "decider_beta", "decider_weight_cap",
                     "decider_class_weights"},
                 "reward");
  read(r, "k", c.k);
  read(r, "l1_weight_agent_class", c.l1_weight_agent_class);
  read(r, "l1_weight_other", c.l1_weight_other);
  read(r, "decider_beta", c.decider_beta);
  read(r, "decider_weight_cap", c.decider_weight_cap);
  read(r, "decider_class_weights", c.decider_class_weights);
}

}  // namespace

json training_config_to_json(const TrainingConfig& cfg) {
  return {{"hyperparameters", hyperparameters_json(cfg)},
          {"reward", reward_json(cfg.reward)},
          {"seed", cfg.seed},
          {"threads", cfg.threads},
          {"shuffle", cfg.shuffle},
          {"softmax_decider_inputs", cfg.softmax_decider_inputs}};
}

TrainingConfig training_config_from_json(const json& j) {
  reject_unknown(j, {"hyperparameters", "reward", "seed", "threads", "shuffle", "softmax_decider_inputs"}, "training");
  TrainingConfig c;
  if (j.contains("hyperparameters")) hyperparameters_from(j.at("hyperparameters"), c);
  if (j.contains("reward")) reward_from(j.at("reward"), c.reward);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  read(j, "shuffle", c.shuffle);
  read(j, "softmax_decider_inputs", c.softmax_decider_inputs);
  return c;
}

void RunConfig::validate() const {
  training.validate();
  if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
    throw ConfigError("config: data.train_fraction must lie in (0, 1)");
  }
  if (data.label_column.empty()) throw ConfigError("config: data.label_column must not be empty");
  if (data.benign_label.empty()) throw ConfigError("config: data.benign_label must not be empty");
  if (!(adapt.new_data_train_fraction > 0.0 && adapt.new_data_train_fraction < 1.0)) {
    throw ConfigError("config: adapt.new_data_train_fraction must lie in (0, 1)");
  }
}

json RunConfig::to_json() const {
  json j = training_config_to_json(training);
  json target = data.benign_downsample_target ? json(*data.benign_downsample_target) : json(nullptr);
  j["data"] = {{"label_column", data.label_column},
               {"delimiter", std::string(1, data.delimiter)},
               {"benign_label", data.benign_label},
               {"benign_downsample_target", target},
               {"train_fraction", data.train_fraction},
               {"label_grouping", data.label_grouping},
               {"drop_columns", data.drop_columns},
               {"exclude_labels", data.exclude_labels}};
  j["adapt"] = {{"episodes", adapt.episodes}, {"new_data_train_fraction", adapt.new_data_train_fraction}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, {"hyperparameters", "reward", "seed", "threads", "shuffle", "softmax_decider_inputs", "data", "adapt"},
                 "config");
  RunConfig c;
  json training = j;
  training.erase("data");
  training.erase("adapt");
  c.training = training_config_from_json(training);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    reject_unknown(d, {"label_column", "delimiter", "benign_label", "benign_downsample_target", "train_fraction",
                       "label_grouping", "drop_columns", "exclude_labels"},
                   "data");
    read(d, "label_column", c.data.label_column);
    if (d.contains("delimiter")) {
      const auto delim = d.at("delimiter").get<std::string>();
      if (delim.size() != 1) throw ConfigError("config: data.delimiter must be a single character");
      c.data.delimiter = delim.front();
    }
    read(d, "benign_label", c.data.benign_label);
    if (d.contains("benign_downsample_target")) {
      const auto& t = d.at("benign_downsample_target");
      if (t.is_null()) {
        c.data.benign_downsample_target.reset();
      } else {
        c.data.benign_downsample_target = t.get<std::size_t>();
      }
    }
    read(d, "train_fraction", c.data.train_fraction);
    read(d, "label_grouping", c.data.label_grouping);
    read(d, "drop_columns", c.data.drop_columns);
    read(d, "exclude_labels", c.data.exclude_labels);
  }
  if (j.contains("adapt")) {
    const auto& a = j.at("adapt");
    reject_unknown(a, {"episodes", "new_data_train_fraction"}, "adapt");
    read(a, "episodes", c.adapt.episodes);
    read(a, "new_data_train_fraction", c.adapt.new_data_train_fraction);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  const auto text = binary::read_file(path);
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json j = to_json();
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    if (!j.contains(path)) throw ConfigError("config: unknown key '" + path + "'");
    j[path] = value;
  } else {
    const auto section = path.substr(0, dot);
    const auto key = path.substr(dot + 1);
    if (!j.contains(section) || !j[section].is_object()) throw ConfigError("config: unknown section '" + section + "'");
    if (!j[section].contains(key)) throw ConfigError("config: unknown key '" + path + "'");
    j[section][key] = value;
  }
  *this = from_json(j);
}

}  // namespace marlids
