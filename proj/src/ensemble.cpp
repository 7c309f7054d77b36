#include "marlids/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "marlids/errors.hpp"

namespace marlids {

void TrainingConfig::validate() const {
  agent.validate();
  // A single agent may bootstrap with gamma = 1; a training run may not.
  if (!(agent.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  reward.validate();
  for (auto h : hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer widths must be positive");
  }
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

std::uint64_t MarlEnsemble::derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // splitmix64 finaliser
  std::uint64_t z = master ^ h;
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

DqnAgent make_l1_agent(std::size_t feature_dim, const std::string& label, const TrainingConfig& cfg) {
  return DqnAgent::create(feature_dim, cfg.hidden_layers, kL1Arity, cfg.agent,
                          MarlEnsemble::derive_seed(cfg.seed, "l1:" + label));
}

DqnAgent make_decider(std::size_t num_attacks, const TrainingConfig& cfg) {
  return DqnAgent::create(kL1Arity * num_attacks, cfg.hidden_layers, num_attacks + 1, cfg.agent,
                          MarlEnsemble::derive_seed(cfg.seed, std::string(kDeciderName)));
}

}  // namespace

MarlEnsemble::MarlEnsemble(std::size_t feature_dim, LabelRegistry registry, TrainingConfig config,
                           ZScoreParams normalization)
    : feature_dim_(feature_dim),
      registry_(std::move(registry)),
      config_(std::move(config)),
      normalization_(std::move(normalization)),
      decider_(make_decider(std::max<std::size_t>(registry_.num_attacks(), 1), config_)) {
  config_.validate();
  if (feature_dim_ == 0) throw ValidationError("ensemble: feature dimension must be positive");
  if (registry_.num_attacks() == 0) throw ValidationError("ensemble: at least one attack label is required");
  for (const auto& label : registry_.attack_labels()) l1_agents_.push_back(make_l1_agent(feature_dim_, label, config_));
  check_shapes();
}

MarlEnsemble::MarlEnsemble(std::size_t feature_dim, LabelRegistry registry, TrainingConfig config,
                           ZScoreParams normalization, std::vector<DqnAgent> l1_agents, DqnAgent decider)
    : feature_dim_(feature_dim),
      registry_(std::move(registry)),
      config_(std::move(config)),
      normalization_(std::move(normalization)),
      l1_agents_(std::move(l1_agents)),
      decider_(std::move(decider)) {
  check_shapes();
}

void MarlEnsemble::check_shapes() const {
  if (l1_agents_.size() != registry_.num_attacks()) {
    throw ValidationError("ensemble: agent count differs from registered attacks");
  }
  for (const auto& a : l1_agents_) {
    if (a.state_dim() != feature_dim_ || a.action_arity() != kL1Arity) {
      throw ValidationError("ensemble: L1 agent shape does not match feature_dim x 3");
    }
  }
  if (decider_.state_dim() != decider_input_dim() || decider_.action_arity() != registry_.size()) {
    throw ValidationError("ensemble: decider shape must be 3N -> N+1");
  }
  if (!normalization_.empty() && normalization_.dim() != feature_dim_) {
    throw ValidationError("ensemble: normalisation dimension differs from feature_dim");
  }
}

void MarlEnsemble::set_config(const TrainingConfig& config) {
  config.validate();
  if (config.hidden_layers != config_.hidden_layers) {
    throw IncompatibleError("ensemble: hidden layer widths cannot change after construction");
  }
  config_ = config;
  for (auto& a : l1_agents_) a.set_config(config_.agent);
  decider_.set_config(config_.agent);
}

const DqnAgent& MarlEnsemble::agent(std::string_view attack_label) const {
  if (!registry_.is_attack(attack_label)) throw ValidationError("no L1 agent for '" + std::string(attack_label) + "'");
  return l1_agents_[registry_.action_index(attack_label)];
}

DqnAgent& MarlEnsemble::mutable_agent(std::string_view attack_label) {
  if (!registry_.is_attack(attack_label)) throw ValidationError("no L1 agent for '" + std::string(attack_label) + "'");
  return l1_agents_[registry_.action_index(attack_label)];
}

Eigen::MatrixXf MarlEnsemble::build_decider_states(const Eigen::MatrixXf& flows) const {
  if (static_cast<std::size_t>(flows.rows()) != feature_dim_) {
    throw ValidationError("decider state: flow has " + std::to_string(flows.rows()) + " features, expected " +
                          std::to_string(feature_dim_));
  }
  Eigen::MatrixXf states(static_cast<Eigen::Index>(decider_input_dim()), flows.cols());
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index start = 0; start < flows.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, flows.cols() - start);
    const Eigen::MatrixXf block = flows.middleCols(start, n);
    for (std::size_t i = 0; i < l1_agents_.size(); ++i) {
      Eigen::MatrixXf q = l1_agents_[i].network().forward_batch(block);
      if (config_.softmax_decider_inputs) {
        for (Eigen::Index c = 0; c < q.cols(); ++c) {
          auto col = q.col(c);
          col.array() = (col.array() - col.maxCoeff()).exp();
          col /= col.sum();
        }
      }
      states.block(static_cast<Eigen::Index>(kL1Arity * i), start, kL1Arity, n) = q;
    }
  }
  return states;
}

std::vector<float> MarlEnsemble::build_decider_state(std::span<const float> flow) const {
  if (flow.size() != feature_dim_) throw ValidationError("decider state: flow dimension mismatch");
  Eigen::MatrixXf col = Eigen::Map<const Eigen::VectorXf>(flow.data(), static_cast<Eigen::Index>(flow.size()));
  const Eigen::MatrixXf s = build_decider_states(col);
  return {s.data(), s.data() + s.size()};
}

Prediction MarlEnsemble::predict(std::span<const float> flow) const {
  if (flow.size() != feature_dim_) throw ValidationError("predict: flow dimension mismatch");
  Eigen::MatrixXf col = Eigen::Map<const Eigen::VectorXf>(flow.data(), static_cast<Eigen::Index>(flow.size()));
  return predict_batch(col).front();
}

std::vector<Prediction> MarlEnsemble::predict_batch(const Eigen::MatrixXf& flows) const {
  const Eigen::MatrixXf states = build_decider_states(flows);
  const Eigen::MatrixXf q = decider_.network().forward_batch(states);
  std::vector<Prediction> out(static_cast<std::size_t>(q.cols()));
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    auto& p = out[static_cast<std::size_t>(c)];
    p.q_values.assign(q.col(c).data(), q.col(c).data() + q.rows());
    p.action = argmax_lowest(q.col(c));
    p.label = registry_.label_at(p.action);
  }
  return out;
}

std::map<std::string, std::string> MarlEnsemble::agent_digests() const {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < l1_agents_.size(); ++i) {
    out[registry_.attack_labels()[i]] = l1_agents_[i].weight_digest();
  }
  out[std::string(kDeciderName)] = decider_.weight_digest();
  return out;
}

void MarlEnsemble::add_attack(const std::string& label) {
  const std::size_t old_n = registry_.num_attacks();
  registry_.add_attack(label);
  l1_agents_.push_back(make_l1_agent(feature_dim_, label, config_));

  // Input: the new triple is appended. Output: the new attack takes index
  // old_n and benign moves from old_n to old_n + 1.
  const QNetwork& old_net = decider_.network();
  auto dims = old_net.layer_dims();
  dims.front() = kL1Arity * (old_n + 1);
  dims.back() = old_n + 2;
  QNetwork widened = QNetwork::initialize(dims, derive_seed(config_.seed, "decider+" + label));
  auto& new_layers = widened.mutable_layers();
  const auto& old_layers = old_net.layers();
  const std::size_t last = old_layers.size() - 1;
  for (std::size_t l = 0; l < old_layers.size(); ++l) {
    const auto& src = old_layers[l];
    auto& dst = new_layers[l];
    for (Eigen::Index r = 0; r < src.weights.rows(); ++r) {
      const Eigen::Index to_row = (l == last && static_cast<std::size_t>(r) == old_n) ? r + 1 : r;
      dst.bias(to_row) = src.bias(r);
      for (Eigen::Index c = 0; c < src.weights.cols(); ++c) dst.weights(to_row, c) = src.weights(r, c);
    }
  }
  widened.reset_adam();
  decider_.replace_network(std::move(widened));
  check_shapes();
}

Eigen::MatrixXf to_feature_matrix(const Dataset& ds) {
  Eigen::MatrixXf m(static_cast<Eigen::Index>(ds.feature_dim()), static_cast<Eigen::Index>(ds.size()));
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto& f = ds.records[j].features;
    if (f.size() != ds.feature_dim()) throw ValidationError("dataset: inconsistent feature count");
    for (std::size_t i = 0; i < f.size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<float>(f[i]);
    }
  }
  return m;
}

namespace {

std::vector<std::size_t> visit_order(std::size_t n, const TrainingConfig& cfg, std::size_t episode) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle) {
    std::mt19937_64 rng(MarlEnsemble::derive_seed(cfg.seed, "order:" + std::to_string(episode)));
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

struct SweepStats {
  double loss_sum = 0.0;
  double reward_sum = 0.0;
  std::size_t n = 0;
};

// One pass of an agent over `states` (columns) in `order`; next_state is the
// next record visited, the last record pairs with itself.
template <typename RewardFn, typename WeightFn>
SweepStats sweep(DqnAgent& agent, const Eigen::MatrixXf& states, const std::vector<std::size_t>& order,
                 RewardFn&& reward_of, WeightFn&& weight_of) {
  SweepStats st;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto k = static_cast<Eigen::Index>(order[pos]);
    const auto k_next = static_cast<Eigen::Index>(order[pos + 1 < order.size() ? pos + 1 : pos]);
    const std::span<const float> s(states.col(k).data(), static_cast<std::size_t>(states.rows()));
    const std::span<const float> s_next(states.col(k_next).data(), static_cast<std::size_t>(states.rows()));
    const std::size_t action = agent.select_action(s);
    const double r = reward_of(order[pos], action);
    st.loss_sum += agent.observe_and_train(s, action, static_cast<float>(r), s_next,
                                           static_cast<float>(weight_of(order[pos])));
    st.reward_sum += r;
    ++st.n;
  }
  return st;
}

EpisodeLog to_log(const SweepStats& st, std::size_t episode, std::string agent, double epsilon) {
  EpisodeLog log;
  log.episode = episode;
  log.agent = std::move(agent);
  log.samples = st.n;
  log.epsilon = epsilon;
  if (st.n > 0) {
    log.mean_loss = st.loss_sum / static_cast<double>(st.n);
    log.mean_reward = st.reward_sum / static_cast<double>(st.n);
  }
  return log;
}

template <typename Fn>
void for_each_parallel(const std::vector<std::size_t>& items, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, items.size()));
  if (threads == 1) {
    for (auto i : items) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < items.size(); j = next++) {
        try {
          fn(items[j]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void check_labels(const MarlEnsemble& ensemble, const Dataset& ds) {
  for (const auto& [label, n] : ds.label_counts()) {
    if (!ensemble.registry().contains(label)) throw ValidationError("dataset label '" + label + "' is not registered");
  }
  if (ds.feature_dim() != ensemble.feature_dim()) {
    throw IncompatibleError("dataset has " + std::to_string(ds.feature_dim()) + " features, ensemble expects " +
                            std::to_string(ensemble.feature_dim()));
  }
}

// Runs `episodes` episodes in which only the L1 agents flagged in `trainable`
// sweep; the decider trains every episode.
TrainingLog run_episodes(MarlEnsemble& ensemble, const Dataset& data, const TrainingConfig& cfg,
                         std::size_t episodes, const std::vector<bool>& trainable) {
  TrainingLog log;
  if (episodes == 0) return log;
  if (data.empty()) throw ValidationError("training set is empty");
  check_labels(ensemble, data);

  const auto& registry = ensemble.registry();
  const Eigen::MatrixXf features = to_feature_matrix(data);
  const std::size_t n = data.size();
  std::vector<std::size_t> true_action(n);
  for (std::size_t j = 0; j < n; ++j) true_action[j] = registry.action_index(data.records[j].label);
  const std::vector<float> decider_w = decider_weights_for(ensemble, data);

  // Per-agent reward inputs, fixed for the run.
  const std::size_t n_agents = ensemble.num_agents();
  std::vector<std::vector<L1Category>> truth(n_agents);
  std::vector<std::vector<float>> l1_w(n_agents);
  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < n_agents; ++a) {
    if (!trainable[a]) continue;
    active.push_back(a);
    const auto& cls = registry.attack_labels()[a];
    truth[a].resize(n);
    l1_w[a].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      truth[a][j] = project_label(data.records[j].label, cls, registry);
      l1_w[a][j] = static_cast<float>(l1_sample_weight(data.records[j].label, cls, cfg.reward));
    }
  }

  auto& agents = ensemble.mutable_l1_agents();
  const double k = cfg.reward.k;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto order = visit_order(n, cfg, e);
    std::vector<EpisodeLog> agent_logs(n_agents);
    for_each_parallel(active, cfg.threads, [&](std::size_t a) {
      DqnAgent& agent = agents[a];
      const double eps = agent.epsilon();
      const auto st = sweep(
          agent, features, order,
          [&](std::size_t j, std::size_t action) {
            return l1_reward(truth[a][j], static_cast<L1Category>(action), k);
          },
          [&](std::size_t j) { return l1_w[a][j]; });
      agent_logs[a] = to_log(st, e, registry.attack_labels()[a], eps);
    });
    for (auto a : active) log.push_back(agent_logs[a]);

    // Decider states come from all agents after this episode's sweeps.
    const Eigen::MatrixXf decider_states = ensemble.build_decider_states(features);
    log.push_back(train_decider(ensemble, decider_states, true_action, decider_w, e));
    for (auto a : active) agents[a].decay_epsilon();
    ensemble.mutable_decider().decay_epsilon();
  }
  return log;
}

}  // namespace

std::vector<float> decider_weights_for(const MarlEnsemble& ensemble, const Dataset& train) {
  const auto& rc = ensemble.config().reward;
  std::map<std::string, double> by_label = rc.decider_class_weights;
  if (by_label.empty()) by_label = decider_sample_weights(train.label_counts(), rc.decider_beta, rc.decider_weight_cap);
  std::vector<float> w(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) {
    auto it = by_label.find(train.records[j].label);
    w[j] = static_cast<float>(it == by_label.end() ? 1.0 : it->second);
  }
  return w;
}

EpisodeLog train_decider(MarlEnsemble& ensemble, const Eigen::MatrixXf& decider_states,
                         std::span<const std::size_t> true_actions, std::span<const float> sample_weights,
                         std::size_t episode) {
  if (static_cast<std::size_t>(decider_states.rows()) != ensemble.decider_input_dim()) {
    throw ValidationError("train_decider: state length " + std::to_string(decider_states.rows()) + " differs from 3N = " +
                          std::to_string(ensemble.decider_input_dim()));
  }
  const auto n = static_cast<std::size_t>(decider_states.cols());
  if (true_actions.size() != n || sample_weights.size() != n) {
    throw ValidationError("train_decider: labels/weights do not match the number of states");
  }
  const auto order = visit_order(n, ensemble.config(), episode);
  DqnAgent& decider = ensemble.mutable_decider();
  const double eps = decider.epsilon();
  const auto st = sweep(
      decider, decider_states, order,
      [&](std::size_t j, std::size_t action) { return decider_reward(action, true_actions[j]); },
      [&](std::size_t j) { return sample_weights[j]; });
  return to_log(st, episode, std::string(kDeciderName), eps);
}

TrainingLog train_all(MarlEnsemble& ensemble, const Dataset& train, const TrainingConfig& config) {
  config.validate();
  if (train.empty()) throw ValidationError("train_all: empty training set");
  check_labels(ensemble, train);
  ensemble.set_config(config);
  return run_episodes(ensemble, train, config, config.episodes, std::vector<bool>(ensemble.num_agents(), true));
}

AdaptResult adapt(MarlEnsemble& ensemble, const Dataset& previous_train, const Dataset& new_data,
                  const std::set<std::string>& affected, const TrainingConfig& config, const AdaptOptions& options) {
  config.validate();
  if (affected.empty()) throw ValidationError("adapt: no affected agents given");
  if (new_data.empty()) throw ValidationError("adapt: new data is empty");
  ensemble.set_config(config);
  AdaptResult result;
  for (const auto& label : affected) {
    if (label == ensemble.registry().benign_label()) {
      throw ValidationError("adapt: '" + label + "' is the benign label and has no L1 agent");
    }
    if (!ensemble.registry().is_attack(label)) {
      if (!options.allow_new_labels) throw ValidationError("adapt: unknown attack label '" + label + "'");
      ensemble.add_attack(label);
      result.added_labels.push_back(label);
    }
  }

  auto [new_train, held_out] =
      split(new_data, options.new_data_train_fraction, MarlEnsemble::derive_seed(config.seed, "adapt-split"));
  result.held_out = std::move(held_out);
  const Dataset combined = previous_train.records.empty() && previous_train.feature_names.empty()
                               ? new_train
                               : concat(previous_train, new_train);

  std::vector<bool> trainable(ensemble.num_agents(), false);
  for (const auto& label : affected) {
    const auto idx = ensemble.registry().action_index(label);
    trainable[idx] = true;
    ensemble.mutable_l1_agents()[idx].buffer().clear();
  }
  ensemble.mutable_decider().buffer().clear();
  result.log = run_episodes(ensemble, combined, config, options.episodes, trainable);
  return result;
}

}  // namespace marlids
