#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace marlids {

/// Incremental SHA-256 over raw bytes. Used for container integrity and
/// per-agent weight fingerprints.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view text);
  template <typename T>
  void update_values(std::span<const T> values) {
    update(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(values.data()),
                                         values.size_bytes()));
  }
  /// Finalizes; the object must not be updated afterwards.
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace marlids
