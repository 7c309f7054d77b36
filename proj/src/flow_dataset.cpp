#include "marlids/flow_dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string_view>

#include "marlids/errors.hpp"

namespace marlids {

std::map<std::string, std::size_t> Dataset::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.label];
  return counts;
}

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

void ZScoreParams::apply(std::span<double> features) const {
  if (features.size() != mean.size()) {
    throw ValidationError("zscore: record has " + std::to_string(features.size()) + " features, parameters have " +
                          std::to_string(mean.size()));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    features[i] = stddev[i] > 0.0 ? (features[i] - mean[i]) / stddev[i] : 0.0;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

Dataset with_provenance(Dataset ds, std::string entry) {
  ds.provenance.push_back(std::move(entry));
  return ds;
}

}  // namespace

double parse_flow_value(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::numeric_limits<double>::quiet_NaN();
  return value;
}

Dataset load_flows(const std::vector<std::filesystem::path>& paths, const LoadOptions& options) {
  if (paths.empty()) throw ValidationError("load_flows: no input files");
  Dataset ds;
  std::vector<std::string> header;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) throw IngestError(file, 1, "missing header row");
    std::vector<std::string> names;
    for (auto c : split_line(line, options.delimiter)) names.emplace_back(trim(c));
    // Strip a UTF-8 byte-order mark from the first column name.
    if (!names.empty() && names.front().starts_with("\xEF\xBB\xBF")) names.front().erase(0, 3);
    if (header.empty()) {
      header = names;
    } else if (names != header) {
      throw IngestError(file, 1, "header differs from '" + paths.front().string() + "'");
    }
    const auto label_it = std::find(names.begin(), names.end(), options.label_column);
    if (label_it == names.end()) throw IngestError(file, 1, "no '" + options.label_column + "' column");
    const auto label_col = static_cast<std::size_t>(label_it - names.begin());
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c == label_col) continue;
      if (std::find(options.drop_columns.begin(), options.drop_columns.end(), names[c]) !=
          options.drop_columns.end()) {
        continue;
      }
      feature_cols.push_back(c);
    }
    if (ds.feature_names.empty()) {
      for (auto c : feature_cols) ds.feature_names.push_back(names[c]);
    }
    std::size_t row = 1;
    std::size_t loaded = 0;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const auto cells = split_line(line, options.delimiter);
      if (cells.size() != names.size()) {
        throw IngestError(file, row,
                          "expected " + std::to_string(names.size()) + " columns, found " +
                              std::to_string(cells.size()));
      }
      FlowRecord rec;
      rec.label = std::string(trim(cells[label_col]));
      if (rec.label.empty()) throw IngestError(file, row, "empty label");
      rec.features.reserve(feature_cols.size());
      for (auto c : feature_cols) rec.features.push_back(parse_flow_value(cells[c]));
      ds.records.push_back(std::move(rec));
      ++loaded;
    }
    ds.provenance.push_back("load " + file + " rows=" + std::to_string(loaded));
  }
  return ds;
}

Dataset clean(const Dataset& ds) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.provenance = ds.provenance;
  for (const auto& r : ds.records) {
    if (std::all_of(r.features.begin(), r.features.end(), [](double v) { return std::isfinite(v); })) {
      out.records.push_back(r);
    }
  }
  const auto dropped = ds.size() - out.size();
  return with_provenance(std::move(out), "clean dropped=" + std::to_string(dropped));
}

ZScoreParams fit_zscore(const Dataset& train) {
  if (train.empty()) throw ValidationError("fit_zscore: empty training set");
  const std::size_t dim = train.feature_dim();
  const auto n = static_cast<double>(train.size());
  ZScoreParams p;
  p.mean.assign(dim, 0.0);
  p.stddev.assign(dim, 0.0);
  for (const auto& r : train.records) {
    if (r.features.size() != dim) throw ValidationError("fit_zscore: inconsistent feature count");
    for (std::size_t i = 0; i < dim; ++i) p.mean[i] += r.features[i];
  }
  for (auto& m : p.mean) m /= n;
  for (const auto& r : train.records) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = r.features[i] - p.mean[i];
      p.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    p.stddev[i] = std::sqrt(p.stddev[i] / n);
    // Round-off can leave a tiny spread on a constant column.
    if (p.stddev[i] <= 1e-12 * std::max(1.0, std::abs(p.mean[i]))) p.stddev[i] = 0.0;
  }
  return p;
}

Dataset apply_zscore(const Dataset& ds, const ZScoreParams& params) {
  Dataset out = ds;
  for (auto& r : out.records) params.apply(r.features);
  return with_provenance(std::move(out), "zscore");
}

std::map<std::string, SplitCounts> stratified_split_counts(const std::map<std::string, std::size_t>& class_counts,
                                                           double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split: train fraction must lie in (0, 1)");
  }
  std::size_t total = 0;
  for (const auto& [label, n] : class_counts) total += n;
  std::map<std::string, SplitCounts> out;
  if (total == 0) return out;
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total)));

  struct Share {
    std::string label;
    std::size_t count;
    std::size_t floor;
    unsigned __int128 remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [label, n] : class_counts) {
    const auto num = static_cast<unsigned __int128>(n_train) * n;
    const auto fl = static_cast<std::size_t>(num / total);
    shares.push_back({label, n, fl, num % total});
    assigned += fl;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
  for (std::size_t i = 0; i < n_train - assigned; ++i) ++shares[order[i]].floor;
  for (const auto& s : shares) out[s.label] = {s.floor, s.count - s.floor};
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const auto counts = stratified_split_counts(ds.label_counts(), train_fraction);
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < ds.size(); ++i) by_label[ds.records[i].label].push_back(i);

  std::vector<bool> in_train(ds.size(), false);
  std::mt19937_64 rng(seed);
  for (auto& [label, idx] : by_label) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = counts.at(label).train;
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  }
  Dataset train;
  Dataset test;
  train.feature_names = test.feature_names = ds.feature_names;
  train.provenance = test.provenance = ds.provenance;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_train[i] ? train : test).records.push_back(ds.records[i]);
  }
  const std::string tag = "fraction=" + std::to_string(train_fraction) + " seed=" + std::to_string(seed);
  train.provenance.push_back("split train " + tag);
  test.provenance.push_back("split test " + tag);
  return {std::move(train), std::move(test)};
}

Dataset downsample_label(const Dataset& ds, const std::string& label, std::size_t target_count, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.records[i].label == label) idx.push_back(i);
  }
  if (target_count > idx.size()) {
    throw ValidationError("downsample: target " + std::to_string(target_count) + " exceeds the " +
                          std::to_string(idx.size()) + " available '" + label + "' records");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> drop(ds.size(), false);
  for (std::size_t i = target_count; i < idx.size(); ++i) drop[idx[i]] = true;
  Dataset out;
  out.feature_names = ds.feature_names;
  out.provenance = ds.provenance;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!drop[i]) out.records.push_back(ds.records[i]);
  }
  return with_provenance(std::move(out), "downsample " + label + " " + std::to_string(idx.size()) + "->" +
                                             std::to_string(target_count) + " seed=" + std::to_string(seed));
}

Dataset regroup_labels(const Dataset& ds, const std::map<std::string, std::string>& grouping) {
  Dataset out = ds;
  for (auto& r : out.records) {
    auto it = grouping.find(r.label);
    if (it == grouping.end()) throw ValidationError("regroup: label '" + r.label + "' has no group");
    r.label = it->second;
  }
  return with_provenance(std::move(out), "regroup groups=" + std::to_string(grouping.size()));
}

std::pair<Dataset, Dataset> exclude_labels(const Dataset& ds, const std::set<std::string>& labels) {
  Dataset kept;
  Dataset excluded;
  kept.feature_names = excluded.feature_names = ds.feature_names;
  kept.provenance = excluded.provenance = ds.provenance;
  for (const auto& r : ds.records) (labels.contains(r.label) ? excluded : kept).records.push_back(r);
  std::string names;
  for (const auto& l : labels) names += (names.empty() ? "" : "|") + l;
  kept.provenance.push_back("exclude " + names);
  excluded.provenance.push_back("only " + names);
  return {std::move(kept), std::move(excluded)};
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.feature_names != b.feature_names) throw IncompatibleError("concat: feature names differ");
  Dataset out = a;
  out.records.insert(out.records.end(), b.records.begin(), b.records.end());
  out.provenance.push_back("concat +" + std::to_string(b.size()));
  return out;
}

std::map<std::string, std::string> cicids2017_default_grouping() {
  std::map<std::string, std::string> g{
      {"BENIGN", "BENIGN"},
      {"DoS Hulk", "(D)DoS"},
      {"DDoS", "(D)DoS"},
      {"DoS GoldenEye", "(D)DoS"},
      {"DoS slowloris", "(D)DoS"},
      {"DoS Slowhttptest", "(D)DoS"},
      {"PortScan", "PortScan"},
      {"FTP-Patator", "Brute Force"},
      {"SSH-Patator", "Brute Force"},
      {"FTP Patator", "Brute Force"},
      {"SSH Patator", "Brute Force"},
      {"Bot", "Bot"},
      {"Infiltration", "Infiltration"},
      {"Heartbleed", "Heartbleed"},
  };
  // The web-attack labels ship with several dash encodings.
  for (const char* dash : {"-", "\xE2\x80\x93", "\xEF\xBF\xBD", "\x96"}) {
    for (const char* kind : {"Brute Force", "XSS", "Sql Injection"}) {
      g[std::string("Web Attack ") + dash + " " + kind] = "Web Attacks";
    }
  }
  for (const char* kind : {"Brute Force", "XSS", "Sql Injection"}) {
    g[std::string("Web_Attack ") + kind] = "Web Attacks";
  }
  return g;
}

}  // namespace marlids
