#include "marlids/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "marlids/errors.hpp"

namespace marlids {

Minibatch to_minibatch(std::span<const Experience> batch) {
  Minibatch mb;
  if (batch.empty()) return mb;
  const auto dim = static_cast<Eigen::Index>(batch.front().state.size());
  const auto n = static_cast<Eigen::Index>(batch.size());
  mb.states.resize(dim, n);
  mb.next_states.resize(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& e = batch[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(e.state.size()) != dim || static_cast<Eigen::Index>(e.next_state.size()) != dim) {
      throw ValidationError("minibatch: inconsistent state dimensions");
    }
    mb.states.col(j) = Eigen::Map<const Eigen::VectorXf>(e.state.data(), dim);
    mb.next_states.col(j) = Eigen::Map<const Eigen::VectorXf>(e.next_state.data(), dim);
    mb.actions.push_back(e.action);
    mb.rewards.push_back(e.reward);
    mb.weights.push_back(e.sample_weight);
  }
  return mb;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::uint64_t seed)
    : capacity_(capacity), state_dim_(state_dim), rng_(seed) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  if (state_dim == 0) throw ValidationError("replay buffer state dimension must be positive");
}

void ReplayBuffer::store(const Experience& e) {
  store(e.state, e.action, e.reward, e.next_state, e.sample_weight);
}

void ReplayBuffer::store(std::span<const float> state, std::size_t action, float reward,
                         std::span<const float> next_state, float sample_weight) {
  if (state.size() != state_dim_ || next_state.size() != state_dim_) {
    throw ValidationError("replay: transition dimension " + std::to_string(state.size()) + "/" +
                          std::to_string(next_state.size()) + " differs from buffer dimension " +
                          std::to_string(state_dim_));
  }
  if (!(sample_weight >= 0.0F) || !std::isfinite(reward)) {
    throw ValidationError("replay: weight must be >= 0 and reward finite");
  }
  std::size_t slot = 0;
  if (size_ < capacity_) {
    slot = size_;
    states_.insert(states_.end(), state.begin(), state.end());
    next_states_.insert(next_states_.end(), next_state.begin(), next_state.end());
    actions_.push_back(action);
    rewards_.push_back(reward);
    weights_.push_back(sample_weight);
    ++size_;
    return;
  }
  slot = head_;
  head_ = (head_ + 1) % capacity_;
  std::copy(state.begin(), state.end(), states_.begin() + static_cast<std::ptrdiff_t>(slot * state_dim_));
  std::copy(next_state.begin(), next_state.end(),
            next_states_.begin() + static_cast<std::ptrdiff_t>(slot * state_dim_));
  actions_[slot] = action;
  rewards_[slot] = reward;
  weights_[slot] = sample_weight;
}

std::vector<std::size_t> ReplayBuffer::draw_indices(std::size_t batch_size) {
  if (size_ == 0) throw EmptyBufferError("replay: cannot sample from an empty buffer");
  if (batch_size == 0) throw ValidationError("replay: batch size must be positive");
  std::vector<std::size_t> out;
  if (batch_size >= size_) {
    out.resize(size_);
    std::iota(out.begin(), out.end(), std::size_t{0});
    std::shuffle(out.begin(), out.end(), rng_);
    return out;
  }
  // Floyd's algorithm: k distinct values from [0, n) in O(k).
  out.reserve(batch_size);
  std::unordered_set<std::size_t> seen;
  seen.reserve(batch_size * 2);
  for (std::size_t j = size_ - batch_size; j < size_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng_);
    const std::size_t chosen = seen.contains(t) ? j : t;
    seen.insert(chosen);
    out.push_back(chosen);
  }
  return out;
}

Experience ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ValidationError("replay: index out of range");
  const std::size_t slot = slot_of(i);
  const auto begin = static_cast<std::ptrdiff_t>(slot * state_dim_);
  const auto end = begin + static_cast<std::ptrdiff_t>(state_dim_);
  Experience e;
  e.state.assign(states_.begin() + begin, states_.begin() + end);
  e.next_state.assign(next_states_.begin() + begin, next_states_.begin() + end);
  e.action = actions_[slot];
  e.reward = rewards_[slot];
  e.sample_weight = weights_[slot];
  return e;
}

std::vector<Experience> ReplayBuffer::sample_minibatch(std::size_t batch_size) {
  std::vector<Experience> out;
  for (auto i : draw_indices(batch_size)) out.push_back(at(i));
  return out;
}

void ReplayBuffer::sample_into(std::size_t batch_size, Minibatch& out) {
  const auto idx = draw_indices(batch_size);
  const auto dim = static_cast<Eigen::Index>(state_dim_);
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.states.resize(dim, n);
  out.next_states.resize(dim, n);
  out.actions.resize(idx.size());
  out.rewards.resize(idx.size());
  out.weights.resize(idx.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t slot = slot_of(idx[static_cast<std::size_t>(j)]);
    out.states.col(j) = Eigen::Map<const Eigen::VectorXf>(states_.data() + slot * state_dim_, dim);
    out.next_states.col(j) = Eigen::Map<const Eigen::VectorXf>(next_states_.data() + slot * state_dim_, dim);
    out.actions[static_cast<std::size_t>(j)] = actions_[slot];
    out.rewards[static_cast<std::size_t>(j)] = rewards_[slot];
    out.weights[static_cast<std::size_t>(j)] = weights_[slot];
  }
}

void ReplayBuffer::clear() {
  size_ = 0;
  head_ = 0;
  states_.clear();
  next_states_.clear();
  actions_.clear();
  rewards_.clear();
  weights_.clear();
}

std::string ReplayBuffer::rng_state() const {
  std::ostringstream os;
  os << rng_;
  return os.str();
}

void ReplayBuffer::set_rng_state(const std::string& state) {
  std::istringstream is(state);
  is >> rng_;
  if (!is) throw ValidationError("replay: malformed rng state");
}

}  // namespace marlids
