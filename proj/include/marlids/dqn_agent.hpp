#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "marlids/dense_network.hpp"
#include "marlids/replay_buffer.hpp"

namespace marlids {

/// Linear per-episode decay: value(e) = max(floor, initial - e * decay).
struct EpsilonSchedule {
  double initial = 1.0;
  double decay_per_episode = 0.01;
  double floor = 0.0;

  double value_after(std::uint64_t episodes) const;
  void validate() const;
};

struct AgentConfig {
  double gamma = 0.01;
  EpsilonSchedule epsilon;
  std::size_t replay_capacity = 10'000'000;
  std::size_t minibatch_size = 1'000'000;
  AdamConfig adam;

  void validate() const;
};

/// One deep Q-learner. Targets come from the live network; there is no
/// separate target network.
class DqnAgent {
 public:
  DqnAgent(QNetwork network, const AgentConfig& config, std::uint64_t seed);

  /// Network input -> hidden... -> arity with ReLU hidden layers.
  static DqnAgent create(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t arity,
                         const AgentConfig& config, std::uint64_t seed);

  /// Epsilon-greedy; exploitation picks the lowest index among tied maxima.
  std::size_t select_action(std::span<const float> state);
  std::size_t greedy_action(std::span<const float> state) const;
  QNetwork::Vector q_values(std::span<const float> state) const;
  /// reward + gamma * max_a Q(next_state, a).
  float compute_target(float reward, std::span<const float> next_state) const;

  /// One Adam step on the weighted loss of the batch; returns the loss
  /// measured before the step.
  double train_step(std::span<const Experience> batch);
  double train_step(const Minibatch& batch);

  /// Stores a transition, samples min(minibatch, occupancy) and trains.
  double observe_and_train(std::span<const float> state, std::size_t action, float reward,
                           std::span<const float> next_state, float sample_weight);

  void decay_epsilon() { ++episodes_decayed_; }
  double epsilon() const { return config_.epsilon.value_after(episodes_decayed_); }
  std::uint64_t episodes_decayed() const { return episodes_decayed_; }
  void set_episodes_decayed(std::uint64_t n) { episodes_decayed_ = n; }

  std::size_t action_arity() const { return network_.output_dim(); }
  std::size_t state_dim() const { return network_.input_dim(); }
  const AgentConfig& config() const { return config_; }
  const QNetwork& network() const { return network_; }
  QNetwork& mutable_network() { return network_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  /// SHA-256 over layer shapes, weights and biases (not Adam state).
  std::string weight_digest() const;

  std::string rng_state() const;
  void set_rng_state(const std::string& state);

  /// Replaces the network (e.g. after widening) and rebuilds an empty buffer
  /// for the new input dimension; the sampling rng carries over.
  void replace_network(QNetwork network);
  /// Swaps hyperparameters; a capacity change empties the replay buffer.
  void set_config(const AgentConfig& config);

 private:
  QNetwork network_;
  AgentConfig config_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  std::uint64_t episodes_decayed_ = 0;
  Minibatch scratch_;
};

/// Lowest index among maximal entries.
template <typename Vec>
std::size_t argmax_lowest(const Vec& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(values.size()); ++i) {
    if (values[static_cast<Eigen::Index>(i)] > values[static_cast<Eigen::Index>(best)]) best = i;
  }
  return best;
}

}  // namespace marlids
