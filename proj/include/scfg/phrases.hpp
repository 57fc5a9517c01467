#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scfg/corpus.hpp"

namespace scfg {

/// Half-open token interval [begin, end).
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  std::uint32_t length() const { return end - begin; }
  bool contains(const Span& o) const { return begin <= o.begin && o.end <= end; }
  bool overlaps(const Span& o) const { return begin < o.end && o.begin < end; }

  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Positional occurrence of a phrase pair inside one sentence pair.
struct SpanPair {
  Span source;
  Span target;
  std::size_t sentence_id = 0;

  bool contains(const SpanPair& o) const {
    return source.contains(o.source) && target.contains(o.target);
  }

  friend auto operator<=>(const SpanPair&, const SpanPair&) = default;
};

/// The strings (u, v) of a phrase pair.
struct PhrasePair {
  std::vector<std::string> source;
  std::vector<std::string> target;

  friend auto operator<=>(const PhrasePair&, const PhrasePair&) = default;
};

using PhraseInventory = std::map<PhrasePair, std::uint64_t>;

/// All span pairs consistent with `a`: no link leaves the box and at least one
/// link lies inside. Unaligned boundary words are included in every possible
/// expansion. With `max_len`, both spans are limited to that many tokens.
/// Sorted by (source, target) span.
std::vector<SpanPair> extract_span_pairs(const SentencePair& sp, const AlignmentSet& a,
                                         std::optional<std::size_t> max_len = std::nullopt);

PhrasePair phrase_of(const SentencePair& sp, const SpanPair& span);

/// Occurrence counts of every consistent phrase pair in the bitext.
PhraseInventory phrase_inventory(const Bitext& b, std::optional<std::size_t> max_len = std::nullopt);

/// `u ||| v ||| count` lines sorted lexicographically by line text.
void write_phrase_dump(std::ostream& out, const PhraseInventory& inv);

}  // namespace scfg
