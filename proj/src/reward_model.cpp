#include "marlids/reward_model.hpp"

#include <algorithm>
#include <cmath>

#include "marlids/errors.hpp"

namespace marlids {

void RewardConfig::validate() const {
  if (!(k > 1.0)) throw ConfigError("reward: k must be > 1");
  if (!(l1_weight_other > 0.0)) throw ConfigError("reward: l1_weight_other must be > 0");
  if (!(l1_weight_agent_class > l1_weight_other)) {
    throw ConfigError("reward: l1_weight_agent_class must exceed l1_weight_other");
  }
  if (!(decider_beta > 0.0)) throw ConfigError("reward: decider_beta must be > 0");
  if (!(decider_weight_cap >= 1.0)) throw ConfigError("reward: decider_weight_cap must be >= 1");
  for (const auto& [label, w] : decider_class_weights) {
    if (!(w > 0.0)) throw ConfigError("reward: decider weight for '" + label + "' must be > 0");
  }
}

L1Category project_label(std::string_view label, std::string_view agent_class, const LabelRegistry& registry) {
  if (!registry.contains(label)) throw ValidationError("unknown label '" + std::string(label) + "'");
  if (label == agent_class) return L1Category::kAgentAttack;
  if (label == registry.benign_label()) return L1Category::kNormal;
  return L1Category::kOtherAttack;
}

double l1_reward(L1Category truth, L1Category action, double k) {
  if (!(k > 1.0)) throw ConfigError("reward: k must be > 1");
  if (truth == L1Category::kAgentAttack) return action == L1Category::kAgentAttack ? k : -k;
  if (action == L1Category::kAgentAttack) return -k;
  return action == truth ? 1.0 : -1.0;
}

double decider_reward(std::size_t action_index, std::size_t true_index) {
  return action_index == true_index ? 1.0 : -1.0;
}

double decider_reward(std::string_view action_label, std::string_view true_label, const LabelRegistry& registry) {
  return decider_reward(registry.action_index(action_label), registry.action_index(true_label));
}

double l1_sample_weight(std::string_view label, std::string_view agent_class, const RewardConfig& config) {
  if (!(config.l1_weight_agent_class > config.l1_weight_other) || !(config.l1_weight_other > 0.0)) {
    throw ConfigError("reward: l1 weights must satisfy agent_class > other > 0");
  }
  return label == agent_class ? config.l1_weight_agent_class : config.l1_weight_other;
}

std::map<std::string, double> decider_sample_weights(const std::map<std::string, std::size_t>& class_counts,
                                                     double beta, double cap) {
  if (!(beta > 0.0) || !(cap >= 1.0)) throw ConfigError("decider weights: need beta > 0 and cap >= 1");
  std::size_t max_count = 0;
  for (const auto& [label, n] : class_counts) {
    if (n == 0) throw ValidationError("decider weights: class '" + label + "' has zero count");
    max_count = std::max(max_count, n);
  }
  std::map<std::string, double> out;
  for (const auto& [label, n] : class_counts) {
    const double ratio = static_cast<double>(max_count) / static_cast<double>(n);
    out[label] = std::min(cap, std::pow(ratio, beta));
  }
  return out;
}

}  // namespace marlids
