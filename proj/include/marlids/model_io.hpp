#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "marlids/ensemble.hpp"

namespace marlids {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary model container:
///   magic "MIDSMODL", u32 format version,
///   JSON header {format_version, feature_dim, label_registry, benign_label, N, config, digests},
///   normalisation block, one block per L1 agent in registry order, decider block,
///   hex SHA-256 of everything before it.
/// Each agent block carries its weights, Adam moments and step, epsilon
/// progress and rng states; replay memory is not stored.
std::string serialize_model(const MarlEnsemble& ensemble);
MarlEnsemble deserialize_model(std::string_view bytes);

void save_model(const MarlEnsemble& ensemble, const std::filesystem::path& path);
MarlEnsemble load_model(const std::filesystem::path& path);

/// SHA-256 of the serialised model.
std::string model_digest(const MarlEnsemble& ensemble);

}  // namespace marlids
