#pragma once

#include <cstdint>
#include <vector>

#include "scfg/grammar.hpp"

namespace scfg::detail {

/// Flat encoding of (left, source, target, fillers) for deduplication.
using ProductionKey = std::vector<std::int64_t>;

inline ProductionKey make_key(const Production& p) {
  ProductionKey k;
  k.reserve(p.source.size() + p.target.size() + p.fillers.size() + 4);
  k.push_back(p.left);
  for (auto s : p.source) k.push_back(s.code());
  k.push_back(INT64_MIN);
  for (auto s : p.target) k.push_back(s.code());
  k.push_back(INT64_MIN);
  for (auto f : p.fillers) k.push_back(f);
  return k;
}

struct ProductionKeyHash {
  std::size_t operator()(const ProductionKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace scfg::detail
