#include "marlids/dqn_agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "marlids/digest.hpp"
#include "marlids/errors.hpp"
#include "marlids/wmse.hpp"

namespace marlids {

double EpsilonSchedule::value_after(std::uint64_t episodes) const {
  return std::clamp(initial - static_cast<double>(episodes) * decay_per_episode, floor, 1.0);
}

void EpsilonSchedule::validate() const {
  if (!(initial >= 0.0 && initial <= 1.0)) throw ConfigError("epsilon: initial value must lie in [0, 1]");
  if (!(decay_per_episode > 0.0)) throw ConfigError("epsilon: decay must be > 0");
  if (!(floor >= 0.0 && floor <= initial)) throw ConfigError("epsilon: floor must lie in [0, initial]");
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  epsilon.validate();
  if (replay_capacity == 0) throw ConfigError("replay capacity must be positive");
  if (minibatch_size == 0) throw ConfigError("minibatch size must be positive");
  adam.validate();
}

namespace {

std::uint64_t buffer_seed_from(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

}  // namespace

DqnAgent::DqnAgent(QNetwork network, const AgentConfig& config, std::uint64_t seed)
    : network_(std::move(network)),
      config_(config),
      buffer_(config.replay_capacity, network_.input_dim(), buffer_seed_from(seed)),
      rng_(seed) {
  config_.validate();
}

DqnAgent DqnAgent::create(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t arity,
                          const AgentConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(arity);
  return DqnAgent(QNetwork::initialize(dims, seed), config, seed);
}

QNetwork::Vector DqnAgent::q_values(std::span<const float> state) const { return network_.forward(state); }

std::size_t DqnAgent::greedy_action(std::span<const float> state) const { return argmax_lowest(q_values(state)); }

std::size_t DqnAgent::select_action(std::span<const float> state) {
  if (state.size() != state_dim()) throw ValidationError("select_action: state dimension mismatch");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng_) < epsilon()) {
    std::uniform_int_distribution<std::size_t> pick(0, action_arity() - 1);
    return pick(rng_);
  }
  return greedy_action(state);
}

float DqnAgent::compute_target(float reward, std::span<const float> next_state) const {
  const auto q = q_values(next_state);
  return reward + static_cast<float>(config_.gamma) * q.maxCoeff();
}

double DqnAgent::train_step(std::span<const Experience> batch) {
  if (batch.empty()) throw ValidationError("train_step: empty batch");
  return train_step(to_minibatch(batch));
}

double DqnAgent::train_step(const Minibatch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw ValidationError("train_step: empty batch");
  if (static_cast<std::size_t>(batch.states.rows()) != state_dim()) {
    throw ValidationError("train_step: state dimension mismatch");
  }
  for (auto a : batch.actions) {
    if (a >= action_arity()) throw ValidationError("train_step: action index out of range");
  }
  QNetwork::ForwardTrace trace;
  const QNetwork::Matrix q = network_.forward_batch(batch.states, &trace);
  const QNetwork::Matrix q_next = network_.forward_batch(batch.next_states);
  const auto gamma = static_cast<float>(config_.gamma);

  std::vector<float> pred(n);
  std::vector<float> target(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    pred[j] = q(static_cast<Eigen::Index>(batch.actions[j]), col);
    target[j] = batch.rewards[j] + gamma * q_next.col(col).maxCoeff();
  }
  const float loss = wmse_loss<float>(pred, target, batch.weights);
  const auto grad = wmse_gradient<float>(pred, target, batch.weights);

  QNetwork::Matrix out_grad = QNetwork::Matrix::Zero(q.rows(), q.cols());
  for (std::size_t j = 0; j < n; ++j) {
    out_grad(static_cast<Eigen::Index>(batch.actions[j]), static_cast<Eigen::Index>(j)) = grad[j];
  }
  network_.adam_step(network_.backprop_batch(trace, out_grad), config_.adam);
  return static_cast<double>(loss);
}

double DqnAgent::observe_and_train(std::span<const float> state, std::size_t action, float reward,
                                   std::span<const float> next_state, float sample_weight) {
  if (action >= action_arity()) throw ValidationError("observe: action index out of range");
  buffer_.store(state, action, reward, next_state, sample_weight);
  buffer_.sample_into(std::min(config_.minibatch_size, buffer_.size()), scratch_);
  return train_step(scratch_);
}

std::string DqnAgent::weight_digest() const {
  Sha256 h;
  for (const auto& l : network_.layers()) {
    const std::int64_t shape[2] = {l.weights.rows(), l.weights.cols()};
    h.update_values(std::span<const std::int64_t>(shape));
    const auto act = static_cast<std::uint8_t>(l.activation);
    h.update_values(std::span<const std::uint8_t>(&act, 1));
    h.update_values(std::span<const float>(l.weights.data(), static_cast<std::size_t>(l.weights.size())));
    h.update_values(std::span<const float>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
  }
  return h.hex_digest();
}

std::string DqnAgent::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void DqnAgent::set_rng_state(const std::string& state) {
  std::istringstream is(state);
  is >> rng_;
  if (!is) throw ValidationError("agent: malformed rng state");
}

void DqnAgent::replace_network(QNetwork network) {
  const auto rng = buffer_.rng_state();
  network_ = std::move(network);
  buffer_ = ReplayBuffer(config_.replay_capacity, network_.input_dim(), 0);
  buffer_.set_rng_state(rng);
}

void DqnAgent::set_config(const AgentConfig& config) {
  config.validate();
  const bool resize = config.replay_capacity != config_.replay_capacity;
  config_ = config;
  if (resize) {
    const auto rng = buffer_.rng_state();
    buffer_ = ReplayBuffer(config_.replay_capacity, network_.input_dim(), 0);
    buffer_.set_rng_state(rng);
  }
}

}  // namespace marlids
