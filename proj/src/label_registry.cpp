#include "marlids/label_registry.hpp"

#include <algorithm>

#include "marlids/errors.hpp"

namespace marlids {

LabelRegistry::LabelRegistry(std::vector<std::string> attack_labels, std::string benign_label)
    : benign_(std::move(benign_label)) {
  if (benign_.empty()) throw ValidationError("registry: benign label must not be empty");
  for (auto& l : attack_labels) add_attack(std::move(l));
}

bool LabelRegistry::is_attack(std::string_view label) const {
  return std::find(attacks_.begin(), attacks_.end(), label) != attacks_.end();
}

bool LabelRegistry::contains(std::string_view label) const { return label == benign_ || is_attack(label); }

std::size_t LabelRegistry::action_index(std::string_view label) const {
  if (label == benign_) return attacks_.size();
  auto it = std::find(attacks_.begin(), attacks_.end(), label);
  if (it == attacks_.end()) throw ValidationError("unknown label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - attacks_.begin());
}

const std::string& LabelRegistry::label_at(std::size_t index) const {
  if (index < attacks_.size()) return attacks_[index];
  if (index == attacks_.size()) return benign_;
  throw ValidationError("registry: action index " + std::to_string(index) + " out of range");
}

std::vector<std::string> LabelRegistry::labels() const {
  auto out = attacks_;
  out.push_back(benign_);
  return out;
}

void LabelRegistry::add_attack(std::string label) {
  if (label.empty()) throw ValidationError("registry: empty label");
  if (contains(label)) throw ValidationError("registry: duplicate label '" + label + "'");
  attacks_.push_back(std::move(label));
}

}  // namespace marlids
