#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "marlids/flow_dataset.hpp"

namespace marlids {

struct ClassSpec {
  std::string label;
  std::size_t count = 0;
};

struct SyntheticOptions {
  std::size_t feature_dim = 8;
  /// Distance scale between class centres, in units of the per-feature noise.
  double separation = 6.0;
  double noise = 1.0;
  std::uint64_t seed = 7;
};

/// Flow-like records drawn from one isotropic Gaussian per class, shuffled.
/// Feature j is rescaled by 10^(j mod 4) so raw magnitudes differ the way
/// byte and packet counters do.
Dataset make_gaussian_flows(const std::vector<ClassSpec>& classes, const SyntheticOptions& options = {});

/// Header of feature names plus label_column, values at round-trip precision.
void write_flows_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& label_column = "Label");

}  // namespace marlids
