#include "marlids/dataset_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "marlids/binary_io.hpp"
#include "marlids/digest.hpp"

namespace marlids {

namespace binary {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void seal(Writer& w) { w.put_raw(sha256_hex(w.bytes())); }

std::string_view unseal(std::string_view bytes, std::string_view context) {
  constexpr std::size_t kDigestLen = 64;
  if (bytes.size() < kDigestLen) throw CorruptContainerError(std::string(context) + ": truncated");
  const auto body = bytes.substr(0, bytes.size() - kDigestLen);
  if (sha256_hex(body) != bytes.substr(bytes.size() - kDigestLen)) {
    throw CorruptContainerError(std::string(context) + ": integrity digest mismatch");
  }
  return body;
}

}  // namespace binary

namespace {
constexpr std::string_view kMagic = "MIDSDATA";
}

std::string serialize_dataset(const DatasetContainer& c) {
  const Dataset& ds = c.data;
  std::map<std::string, std::uint32_t> label_ids;
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& r : ds.records) {
    if (label_ids.emplace(r.label, static_cast<std::uint32_t>(label_ids.size())).second) labels.push_back(r.label);
  }
  nlohmann::json header{{"format_version", kDatasetFormatVersion},
                        {"feature_names", ds.feature_names},
                        {"labels", labels},
                        {"provenance", ds.provenance},
                        {"record_count", ds.size()},
                        {"has_normalization", !c.normalization.empty()}};
  binary::Writer w;
  w.put_raw(kMagic);
  w.put<std::uint32_t>(kDatasetFormatVersion);
  w.put_string(header.dump());
  for (const auto& r : ds.records) {
    if (r.features.size() != ds.feature_dim()) throw ValidationError("dataset: inconsistent feature count");
    w.put<std::uint32_t>(label_ids.at(r.label));
    w.put_array(std::span<const double>(r.features));
  }
  if (!c.normalization.empty()) {
    w.put_array(std::span<const double>(c.normalization.mean));
    w.put_array(std::span<const double>(c.normalization.stddev));
  }
  binary::seal(w);
  return w.release();
}

DatasetContainer deserialize_dataset(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CorruptContainerError("dataset container: bad magic");
  }
  const auto body = binary::unseal(bytes, "dataset container");
  binary::Reader r(body, "dataset container");
  r.get_raw(kMagic.size());
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetFormatVersion) {
    throw CorruptContainerError("dataset container: unsupported format version " + std::to_string(version));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptContainerError(std::string("dataset container: bad header: ") + e.what());
  }
  DatasetContainer c;
  c.data.feature_names = header.at("feature_names").get<std::vector<std::string>>();
  c.data.provenance = header.at("provenance").get<std::vector<std::string>>();
  const auto labels = header.at("labels").get<std::vector<std::string>>();
  const auto n = header.at("record_count").get<std::size_t>();
  const std::size_t dim = c.data.feature_dim();
  c.data.records.resize(n);
  for (auto& rec : c.data.records) {
    const auto id = r.get<std::uint32_t>();
    if (id >= labels.size()) throw CorruptContainerError("dataset container: label id out of range");
    rec.label = labels[id];
    rec.features.resize(dim);
    r.get_array(std::span<double>(rec.features));
  }
  if (header.at("has_normalization").get<bool>()) {
    c.normalization.mean.resize(dim);
    c.normalization.stddev.resize(dim);
    r.get_array(std::span<double>(c.normalization.mean));
    r.get_array(std::span<double>(c.normalization.stddev));
  }
  if (r.remaining() != 0) throw CorruptContainerError("dataset container: trailing bytes");
  return c;
}

void write_dataset(const std::filesystem::path& path, const DatasetContainer& container) {
  binary::write_file(path, serialize_dataset(container));
}

DatasetContainer read_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(binary::read_file(path));
}

}  // namespace marlids
