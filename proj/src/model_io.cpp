#include "marlids/model_io.hpp"

#include <json.hpp>

#include "marlids/binary_io.hpp"
#include "marlids/digest.hpp"
#include "marlids/run_config.hpp"

namespace marlids {
namespace {

constexpr std::string_view kMagic = "MIDSMODL";

template <typename M>
void put_matrix(binary::Writer& w, const M& m) {
  w.put_array(std::span<const float>(m.data(), static_cast<std::size_t>(m.size())));
}

template <typename M>
void get_matrix(binary::Reader& r, M& m) {
  r.get_array(std::span<float>(m.data(), static_cast<std::size_t>(m.size())));
}

void put_agent(binary::Writer& w, const std::string& name, const DqnAgent& agent) {
  w.put_string(name);
  w.put<std::uint64_t>(agent.episodes_decayed());
  w.put_string(agent.rng_state());
  w.put_string(agent.buffer().rng_state());
  const auto& net = agent.network();
  const auto& adam = net.adam_state();
  w.put<std::uint64_t>(net.num_layers());
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const auto& l = net.layers()[i];
    w.put<std::uint64_t>(static_cast<std::uint64_t>(l.weights.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(l.weights.cols()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.activation));
    put_matrix(w, l.weights);
    put_matrix(w, l.bias);
    put_matrix(w, adam.first_moment.weights[i]);
    put_matrix(w, adam.second_moment.weights[i]);
    put_matrix(w, adam.first_moment.biases[i]);
    put_matrix(w, adam.second_moment.biases[i]);
  }
  w.put<std::uint64_t>(adam.step);
}

DqnAgent get_agent(binary::Reader& r, const std::string& expected_name, const AgentConfig& cfg) {
  const auto name = r.get_string();
  if (name != expected_name) {
    throw CorruptContainerError("model container: expected agent '" + expected_name + "', found '" + name + "'");
  }
  const auto decayed = r.get<std::uint64_t>();
  const auto rng = r.get_string();
  const auto buffer_rng = r.get_string();
  const auto n_layers = r.get<std::uint64_t>();
  if (n_layers == 0 || n_layers > 64) throw CorruptContainerError("model container: implausible layer count");
  std::vector<QNetwork::Layer> layers(n_layers);
  std::vector<QNetwork::Matrix> mw(n_layers), vw(n_layers);
  std::vector<QNetwork::Vector> mb(n_layers), vb(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto rows = static_cast<Eigen::Index>(r.get<std::uint64_t>());
    const auto cols = static_cast<Eigen::Index>(r.get<std::uint64_t>());
    const auto act = r.get<std::uint8_t>();
    if (act > 1) throw CorruptContainerError("model container: unknown activation");
    if (rows <= 0 || cols <= 0 || static_cast<std::size_t>(rows * cols) > r.remaining()) {
      throw CorruptContainerError("model container: implausible layer shape");
    }
    auto& l = layers[i];
    l.activation = static_cast<Activation>(act);
    l.weights.resize(rows, cols);
    l.bias.resize(rows);
    mw[i].resize(rows, cols);
    vw[i].resize(rows, cols);
    mb[i].resize(rows);
    vb[i].resize(rows);
    get_matrix(r, l.weights);
    get_matrix(r, l.bias);
    get_matrix(r, mw[i]);
    get_matrix(r, vw[i]);
    get_matrix(r, mb[i]);
    get_matrix(r, vb[i]);
  }
  const auto step = r.get<std::uint64_t>();
  QNetwork net;
  try {
    net = QNetwork(std::move(layers));
  } catch (const ValidationError& e) {
    throw CorruptContainerError(std::string("model container: ") + e.what());
  }
  auto& adam = net.mutable_adam_state();
  adam.first_moment.weights = std::move(mw);
  adam.second_moment.weights = std::move(vw);
  adam.first_moment.biases = std::move(mb);
  adam.second_moment.biases = std::move(vb);
  adam.step = step;
  DqnAgent agent(std::move(net), cfg, 0);
  agent.set_episodes_decayed(decayed);
  agent.set_rng_state(rng);
  agent.buffer().set_rng_state(buffer_rng);
  return agent;
}

}  // namespace

std::string serialize_model(const MarlEnsemble& ensemble) {
  const auto& reg = ensemble.registry();
  nlohmann::json header{{"format_version", kModelFormatVersion},
                        {"feature_dim", ensemble.feature_dim()},
                        {"label_registry", reg.attack_labels()},
                        {"benign_label", reg.benign_label()},
                        {"N", reg.num_attacks()},
                        {"config", training_config_to_json(ensemble.config())},
                        {"digests", ensemble.agent_digests()}};
  binary::Writer w;
  w.put_raw(kMagic);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put_string(header.dump());
  const auto& norm = ensemble.normalization();
  w.put<std::uint64_t>(norm.dim());
  w.put_array(std::span<const double>(norm.mean));
  w.put_array(std::span<const double>(norm.stddev));
  for (std::size_t i = 0; i < reg.num_attacks(); ++i) put_agent(w, reg.attack_labels()[i], ensemble.l1_agents()[i]);
  put_agent(w, std::string(kDeciderName), ensemble.decider());
  binary::seal(w);
  return w.release();
}

MarlEnsemble deserialize_model(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CorruptContainerError("model container: bad magic");
  }
  const auto body = binary::unseal(bytes, "model container");
  binary::Reader r(body, "model container");
  r.get_raw(kMagic.size());
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw CorruptContainerError("model container: unsupported format version " + std::to_string(version));
  }
  nlohmann::json header;
  TrainingConfig cfg;
  LabelRegistry registry;
  std::size_t feature_dim = 0;
  try {
    header = nlohmann::json::parse(r.get_string());
    cfg = training_config_from_json(header.at("config"));
    registry = LabelRegistry(header.at("label_registry").get<std::vector<std::string>>(),
                             header.at("benign_label").get<std::string>());
    feature_dim = header.at("feature_dim").get<std::size_t>();
    if (header.at("N").get<std::size_t>() != registry.num_attacks()) {
      throw CorruptContainerError("model container: N disagrees with the registry");
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptContainerError(std::string("model container: bad header: ") + e.what());
  }
  ZScoreParams norm;
  const auto norm_dim = r.get<std::uint64_t>();
  if (norm_dim != 0 && norm_dim != feature_dim) throw CorruptContainerError("model container: normalisation dim");
  norm.mean.resize(norm_dim);
  norm.stddev.resize(norm_dim);
  r.get_array(std::span<double>(norm.mean));
  r.get_array(std::span<double>(norm.stddev));
  std::vector<DqnAgent> agents;
  for (const auto& label : registry.attack_labels()) agents.push_back(get_agent(r, label, cfg.agent));
  DqnAgent decider = get_agent(r, std::string(kDeciderName), cfg.agent);
  if (r.remaining() != 0) throw CorruptContainerError("model container: trailing bytes");
  try {
    return MarlEnsemble(feature_dim, std::move(registry), cfg, std::move(norm), std::move(agents), std::move(decider));
  } catch (const ValidationError& e) {
    throw CorruptContainerError(std::string("model container: ") + e.what());
  }
}

void save_model(const MarlEnsemble& ensemble, const std::filesystem::path& path) {
  binary::write_file(path, serialize_model(ensemble));
}

MarlEnsemble load_model(const std::filesystem::path& path) { return deserialize_model(binary::read_file(path)); }

std::string model_digest(const MarlEnsemble& ensemble) { return sha256_hex(serialize_model(ensemble)); }

}  // namespace marlids
