#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace marlids {

/// One stored transition. sample_weight is the per-sample loss weight.
struct Experience {
  std::vector<float> state;
  std::size_t action = 0;
  float reward = 0.0F;
  std::vector<float> next_state;
  float sample_weight = 1.0F;
};

/// Column-major view of a sampled batch, one transition per column.
struct Minibatch {
  Eigen::MatrixXf states;
  Eigen::MatrixXf next_states;
  std::vector<std::size_t> actions;
  std::vector<float> rewards;
  std::vector<float> weights;

  std::size_t size() const { return actions.size(); }
};

Minibatch to_minibatch(std::span<const Experience> batch);

/// Fixed-capacity FIFO ring of transitions with uniform sampling without
/// replacement. Storage grows lazily up to capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::uint64_t seed);

  void store(const Experience& e);
  void store(std::span<const float> state, std::size_t action, float reward, std::span<const float> next_state,
             float sample_weight);

  /// min(batch_size, size()) distinct entries. Throws EmptyBufferError when empty.
  std::vector<Experience> sample_minibatch(std::size_t batch_size);
  void sample_into(std::size_t batch_size, Minibatch& out);
  /// Logical indices (0 = oldest) of a sampled batch; shares the rng with sample_minibatch.
  std::vector<std::size_t> draw_indices(std::size_t batch_size);

  /// i-th oldest entry.
  Experience at(std::size_t i) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  bool empty() const { return size_ == 0; }
  void clear();

  std::string rng_state() const;
  void set_rng_state(const std::string& state);

 private:
  std::size_t slot_of(std::size_t logical) const { return (head_ + logical) % capacity_; }

  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest entry once the ring is full
  std::vector<float> states_;
  std::vector<float> next_states_;
  std::vector<std::size_t> actions_;
  std::vector<float> rewards_;
  std::vector<float> weights_;
  std::mt19937_64 rng_;
};

}  // namespace marlids
