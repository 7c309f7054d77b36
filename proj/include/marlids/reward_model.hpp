#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "marlids/label_registry.hpp"

namespace marlids {

/// A label seen through one L1 agent. The values double as L1 action indices.
enum class L1Category : std::uint8_t { kAgentAttack = 0, kOtherAttack = 1, kNormal = 2 };

inline constexpr std::size_t kL1Arity = 3;

struct RewardConfig {
  double k = 5.0;
  double l1_weight_agent_class = 2.0;
  double l1_weight_other = 1.0;
  /// Exponent and cap of the inverse-frequency decider weights.
  double decider_beta = 0.5;
  double decider_weight_cap = 100.0;
  /// When non-empty, used instead of the frequency-derived decider weights.
  std::map<std::string, double> decider_class_weights;

  void validate() const;
};

L1Category project_label(std::string_view label, std::string_view agent_class, const LabelRegistry& registry);

/// Cost-sensitive L1 reward:
///   truth = agent class:  +k if the action says so, -k otherwise;
///   truth != agent class: -k for claiming the agent class, +1 if the action
///   matches the truth, -1 otherwise.
double l1_reward(L1Category truth, L1Category action, double k);

/// +1 for a correct final label, -1 otherwise.
double decider_reward(std::string_view action_label, std::string_view true_label, const LabelRegistry& registry);
double decider_reward(std::size_t action_index, std::size_t true_index);

double l1_sample_weight(std::string_view label, std::string_view agent_class, const RewardConfig& config);

/// weight(c) = min(cap, (max_count / count(c))^beta); the most frequent class gets 1.
std::map<std::string, double> decider_sample_weights(const std::map<std::string, std::size_t>& class_counts,
                                                     double beta = 0.5, double cap = 100.0);

}  // namespace marlids
