#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace marlids {

/// Canonical action-index mapping: attacks occupy 0..N-1 in insertion order,
/// the benign label is N.
class LabelRegistry {
 public:
  LabelRegistry() = default;
  LabelRegistry(std::vector<std::string> attack_labels, std::string benign_label);

  std::size_t num_attacks() const { return attacks_.size(); }
  std::size_t size() const { return attacks_.size() + 1; }
  const std::vector<std::string>& attack_labels() const { return attacks_; }
  const std::string& benign_label() const { return benign_; }

  bool contains(std::string_view label) const;
  bool is_attack(std::string_view label) const;
  /// Throws ValidationError for unknown labels.
  std::size_t action_index(std::string_view label) const;
  std::size_t benign_index() const { return attacks_.size(); }
  const std::string& label_at(std::size_t index) const;
  /// All labels in action-index order.
  std::vector<std::string> labels() const;

  /// Appends a new attack label; benign shifts to the new last index.
  void add_attack(std::string label);

  bool operator==(const LabelRegistry&) const = default;

 private:
  std::vector<std::string> attacks_;
  std::string benign_;
};

}  // namespace marlids
