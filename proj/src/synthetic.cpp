#include "marlids/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include "marlids/errors.hpp"

namespace marlids {

Dataset make_gaussian_flows(const std::vector<ClassSpec>& classes, const SyntheticOptions& options) {
  if (options.feature_dim == 0) throw ValidationError("synthetic: feature_dim must be positive");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  Dataset ds;
  for (std::size_t j = 0; j < options.feature_dim; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  std::vector<double> scale(options.feature_dim);
  for (std::size_t j = 0; j < options.feature_dim; ++j) scale[j] = std::pow(10.0, static_cast<double>(j % 4));

  for (const auto& cls : classes) {
    std::vector<double> centre(options.feature_dim);
    double norm = 0.0;
    for (auto& c : centre) {
      c = unit(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (auto& c : centre) c *= options.separation / norm;
    for (std::size_t i = 0; i < cls.count; ++i) {
      FlowRecord r;
      r.label = cls.label;
      r.features.resize(options.feature_dim);
      for (std::size_t j = 0; j < options.feature_dim; ++j) {
        r.features[j] = (centre[j] + options.noise * unit(rng)) * scale[j];
      }
      ds.records.push_back(std::move(r));
    }
  }
  std::shuffle(ds.records.begin(), ds.records.end(), rng);
  ds.provenance.push_back("synthetic seed=" + std::to_string(options.seed));
  return ds;
}

void write_flows_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& label_column) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& name : ds.feature_names) out << name << ',';
  out << label_column << '\n';
  out << std::setprecision(17);
  for (const auto& r : ds.records) {
    for (double v : r.features) out << v << ',';
    out << r.label << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace marlids
