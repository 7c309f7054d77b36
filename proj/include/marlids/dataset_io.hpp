#pragma once

#include <filesystem>
#include <string>

#include "marlids/flow_dataset.hpp"

namespace marlids {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// A dataset plus the normalisation that was applied to it (empty if none).
struct DatasetContainer {
  Dataset data;
  ZScoreParams normalization;
};

std::string serialize_dataset(const DatasetContainer& container);
DatasetContainer deserialize_dataset(std::string_view bytes);

void write_dataset(const std::filesystem::path& path, const DatasetContainer& container);
DatasetContainer read_dataset(const std::filesystem::path& path);

}  // namespace marlids
