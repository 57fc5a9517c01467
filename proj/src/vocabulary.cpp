#include "scfg/vocabulary.hpp"

namespace scfg {

TokenId Vocabulary::intern(std::string_view token) {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

}  // namespace scfg
