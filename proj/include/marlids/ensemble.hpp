#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marlids/dqn_agent.hpp"
#include "marlids/flow_dataset.hpp"
#include "marlids/label_registry.hpp"
#include "marlids/reward_model.hpp"

namespace marlids {

struct TrainingConfig {
  std::size_t episodes = 300;
  std::vector<std::size_t> hidden_layers{128, 128};
  AgentConfig agent;
  RewardConfig reward;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  /// Visit records in a per-episode random order instead of dataset order.
  bool shuffle = false;
  /// Softmax each L1 Q-triple before it enters the decider state.
  bool softmax_decider_inputs = false;

  void validate() const;
};

/// Per-episode statistics of one agent sweep.
struct EpisodeLog {
  std::size_t episode = 0;
  std::string agent;  // attack label, or "decider"
  double mean_loss = 0.0;
  double mean_reward = 0.0;
  double epsilon = 0.0;  // value in effect during the sweep
  std::size_t samples = 0;
};

using TrainingLog = std::vector<EpisodeLog>;

struct Prediction {
  std::size_t action = 0;
  std::string label;
  std::vector<float> q_values;  // decider output, registry order
};

inline constexpr std::string_view kDeciderName = "decider";

/// N attack-specific L1 agents (arity 3) feeding one decider (arity N+1)
/// whose state is the concatenation of the L1 Q-triples in registry order.
class MarlEnsemble {
 public:
  /// Fresh ensemble: one L1 agent per registered attack, randomly initialised.
  MarlEnsemble(std::size_t feature_dim, LabelRegistry registry, TrainingConfig config,
               ZScoreParams normalization = {});
  /// Assembles an ensemble from existing parts (deserialisation).
  MarlEnsemble(std::size_t feature_dim, LabelRegistry registry, TrainingConfig config, ZScoreParams normalization,
               std::vector<DqnAgent> l1_agents, DqnAgent decider);

  std::size_t feature_dim() const { return feature_dim_; }
  const LabelRegistry& registry() const { return registry_; }
  const TrainingConfig& config() const { return config_; }
  void set_config(const TrainingConfig& config);
  const ZScoreParams& normalization() const { return normalization_; }
  void set_normalization(ZScoreParams p) { normalization_ = std::move(p); }

  std::size_t num_agents() const { return l1_agents_.size(); }
  std::size_t decider_input_dim() const { return kL1Arity * l1_agents_.size(); }
  const std::vector<DqnAgent>& l1_agents() const { return l1_agents_; }
  std::vector<DqnAgent>& mutable_l1_agents() { return l1_agents_; }
  const DqnAgent& agent(std::string_view attack_label) const;
  DqnAgent& mutable_agent(std::string_view attack_label);
  const DqnAgent& decider() const { return decider_; }
  DqnAgent& mutable_decider() { return decider_; }

  std::vector<float> build_decider_state(std::span<const float> flow) const;
  /// One flow per column in, one decider state per column out.
  Eigen::MatrixXf build_decider_states(const Eigen::MatrixXf& flows) const;

  /// Greedy decider decision over an already normalised flow.
  Prediction predict(std::span<const float> flow) const;
  std::vector<Prediction> predict_batch(const Eigen::MatrixXf& flows) const;

  /// Adds a fresh L1 agent and widens the decider; surviving decider weights
  /// are copied into their matching positions.
  void add_attack(const std::string& label);

  /// Weight digests keyed by attack label plus "decider".
  std::map<std::string, std::string> agent_digests() const;

  static std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

 private:
  void check_shapes() const;

  std::size_t feature_dim_;
  LabelRegistry registry_;
  TrainingConfig config_;
  ZScoreParams normalization_;
  std::vector<DqnAgent> l1_agents_;
  DqnAgent decider_;
};

/// Features as a float matrix, one record per column.
Eigen::MatrixXf to_feature_matrix(const Dataset& ds);

/// Multi-agent training loop: every episode, each L1 agent sweeps the whole
/// dataset, then the decider sweeps the post-sweep Q-triples. Epsilon decays
/// once per episode for every agent that trained.
TrainingLog train_all(MarlEnsemble& ensemble, const Dataset& train, const TrainingConfig& config);

/// One decider sweep over precomputed decider states (one per column).
EpisodeLog train_decider(MarlEnsemble& ensemble, const Eigen::MatrixXf& decider_states,
                         std::span<const std::size_t> true_actions, std::span<const float> sample_weights,
                         std::size_t episode = 0);

/// Per-record decider weights derived from the class counts of `train`.
std::vector<float> decider_weights_for(const MarlEnsemble& ensemble, const Dataset& train);

struct AdaptOptions {
  std::size_t episodes = 20;
  double new_data_train_fraction = 0.8;
  /// Affected labels missing from the registry become new L1 agents.
  bool allow_new_labels = true;
};

struct AdaptResult {
  Dataset held_out;  // the part of new_data not used for training
  std::vector<std::string> added_labels;
  TrainingLog log;
};

/// Retrains only the affected L1 agents and the decider on previous_train
/// plus a stratified share of new_data. Every other agent is left untouched.
AdaptResult adapt(MarlEnsemble& ensemble, const Dataset& previous_train, const Dataset& new_data,
                  const std::set<std::string>& affected, const TrainingConfig& config,
                  const AdaptOptions& options = {});

}  // namespace marlids
