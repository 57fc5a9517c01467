#include "scfg/phrases.hpp"

#include <algorithm>
#include <ostream>
#include <vector>

namespace scfg {

std::vector<SpanPair> extract_span_pairs(const SentencePair& sp, const AlignmentSet& a,
                                         std::optional<std::size_t> max_len) {
  const auto n = static_cast<std::uint32_t>(sp.source.size());
  const auto m = static_cast<std::uint32_t>(sp.target.size());
  std::vector<std::vector<std::uint32_t>> tgt_of_src(n), src_of_tgt(m);
  for (const auto& l : a.links) {
    tgt_of_src[l.src].push_back(l.tgt);
    src_of_tgt[l.tgt].push_back(l.src);
  }
  auto within = [&](std::uint32_t len) { return !max_len || len <= *max_len; };

  std::vector<SpanPair> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t tmin = m, tmax = 0;
    bool any = false;
    for (std::uint32_t j = i + 1; j <= n; ++j) {
      if (!within(j - i)) break;
      for (auto t : tgt_of_src[j - 1]) {
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
        any = true;
      }
      if (!any) continue;
      // Every target word in [tmin, tmax] must link back into [i, j).
      bool consistent = true;
      for (std::uint32_t t = tmin; t <= tmax && consistent; ++t) {
        for (auto s : src_of_tgt[t]) {
          if (s < i || s >= j) {
            consistent = false;
            break;
          }
        }
      }
      if (!consistent) continue;
      // Grow over unaligned target words on both edges.
      std::uint32_t lo_limit = tmin;
      while (lo_limit > 0 && src_of_tgt[lo_limit - 1].empty()) --lo_limit;
      std::uint32_t hi_limit = tmax;
      while (hi_limit + 1 < m && src_of_tgt[hi_limit + 1].empty()) ++hi_limit;
      for (std::uint32_t lo = lo_limit; lo <= tmin; ++lo) {
        for (std::uint32_t hi = tmax; hi <= hi_limit; ++hi) {
          if (!within(hi + 1 - lo)) break;
          out.push_back(SpanPair{Span{i, j}, Span{lo, hi + 1}, sp.id});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PhrasePair phrase_of(const SentencePair& sp, const SpanPair& span) {
  PhrasePair p;
  p.source.assign(sp.source.begin() + span.source.begin, sp.source.begin() + span.source.end);
  p.target.assign(sp.target.begin() + span.target.begin, sp.target.begin() + span.target.end);
  return p;
}

PhraseInventory phrase_inventory(const Bitext& b, std::optional<std::size_t> max_len) {
  PhraseInventory inv;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (const auto& span : extract_span_pairs(b.pairs[i], b.alignments[i], max_len)) {
      ++inv[phrase_of(b.pairs[i], span)];
    }
  }
  return inv;
}

void write_phrase_dump(std::ostream& out, const PhraseInventory& inv) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
    return s;
  };
  std::vector<std::string> lines;
  lines.reserve(inv.size());
  for (const auto& [pp, count] : inv) {
    lines.push_back(join(pp.source) + " ||| " + join(pp.target) + " ||| " + std::to_string(count));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace scfg
