#include "scfg/extract.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "production_key.hpp"
#include "scfg/parallel.hpp"

namespace scfg {
namespace {

/// Span pairs of one sentence in numbering order (longest source first).
bool numbering_order(const SpanPair& a, const SpanPair& b) {
  if (a.source.length() != b.source.length()) return a.source.length() > b.source.length();
  if (a.source.begin != b.source.begin) return a.source.begin < b.source.begin;
  if (a.target.length() != b.target.length()) return a.target.length() > b.target.length();
  return a.target.begin < b.target.begin;
}

struct GapRules {
  std::size_t max_gaps;
  bool forbid_adjacent;
  std::optional<std::size_t> max_src_symbols;
};

/// Replaces the chosen inner spans of `outer` by gaps. `chosen` is in source order.
Production substitute(const SpanPair& outer, const std::vector<const SpanPair*>& chosen,
                      const std::vector<NtId>& chosen_nt, const std::vector<TokenId>& src,
                      const std::vector<TokenId>& tgt, NtId left) {
  Production p;
  p.left = left;
  std::size_t k = 0;
  for (auto i = outer.source.begin; i < outer.source.end;) {
    if (k < chosen.size() && chosen[k]->source.begin == i) {
      p.source.push_back(Symbol::gap(static_cast<std::uint32_t>(k + 1)));
      i = chosen[k]->source.end;
      ++k;
    } else {
      p.source.push_back(Symbol::terminal(src[i++]));
    }
  }
  for (auto j = outer.target.begin; j < outer.target.end;) {
    auto it = std::find_if(chosen.begin(), chosen.end(), [&](const SpanPair* s) { return s->target.begin == j; });
    if (it != chosen.end()) {
      p.target.push_back(Symbol::gap(static_cast<std::uint32_t>(it - chosen.begin() + 1)));
      j = (*it)->target.end;
    } else {
      p.target.push_back(Symbol::terminal(tgt[j++]));
    }
  }
  p.fillers = chosen_nt;
  return p;
}

/// Enumerates every set of 1..max_gaps pairwise-disjoint inner span pairs of
/// `outer` and emits the resulting gapped productions that keep a source terminal.
template <typename Emit>
void enumerate_gapped(const SpanPair& outer, const std::vector<SpanPair>& spans, const std::vector<NtId>& nt_of,
                      const std::vector<TokenId>& src, const std::vector<TokenId>& tgt, NtId left,
                      const GapRules& rules, Emit&& emit) {
  std::vector<std::size_t> inner;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i] != outer && outer.contains(spans[i])) inner.push_back(i);
  }
  std::sort(inner.begin(), inner.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(spans[a].source, spans[a].target) < std::tie(spans[b].source, spans[b].target);
  });
  std::vector<const SpanPair*> chosen;
  std::vector<NtId> chosen_nt;
  std::uint32_t covered = 0;

  auto recurse = [&](auto& self, std::size_t from) -> void {
    for (std::size_t idx = from; idx < inner.size(); ++idx) {
      const auto& cand = spans[inner[idx]];
      if (!chosen.empty()) {
        const auto& prev = *chosen.back();
        if (cand.source.begin < prev.source.end) continue;
        if (rules.forbid_adjacent && cand.source.begin == prev.source.end) continue;
        bool clash = std::any_of(chosen.begin(), chosen.end(),
                                 [&](const SpanPair* c) { return c->target.overlaps(cand.target); });
        if (clash) continue;
      }
      chosen.push_back(&cand);
      chosen_nt.push_back(nt_of[inner[idx]]);
      covered += cand.source.length();
      const auto symbols = outer.source.length() - covered + chosen.size();
      bool lexical = covered < outer.source.length();
      bool small_enough = !rules.max_src_symbols || symbols <= *rules.max_src_symbols;
      if (lexical && small_enough) emit(substitute(outer, chosen, chosen_nt, src, tgt, left));
      // Symbol count can only shrink by adding further gaps, so recurse regardless.
      if (chosen.size() < rules.max_gaps) self(self, idx + 1);
      covered -= cand.source.length();
      chosen.pop_back();
      chosen_nt.pop_back();
    }
  };
  recurse(recurse, 0);
}

std::vector<TokenId> intern_all(const std::vector<std::string>& tokens, Vocabulary& v) {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(v.intern(t));
  return out;
}

std::vector<Symbol> terminals(const std::vector<TokenId>& ids, Span s) {
  std::vector<Symbol> out;
  for (auto i = s.begin; i < s.end; ++i) out.push_back(Symbol::terminal(ids[i]));
  return out;
}

struct SentenceSpans {
  std::vector<SpanPair> spans;  // numbering order
  std::vector<NtId> nts;
  std::vector<TokenId> src, tgt;
  bool usable = false;
};

}  // namespace

Scfg extract_specialized(const Bitext& b, const ExtractOptions& opt, std::vector<std::string>* warnings) {
  Vocabulary vocab;
  std::vector<NonTerminal> nts;
  nts.push_back(NonTerminal{"I", NtKind::initial, std::nullopt, Count(0)});
  std::map<std::pair<std::vector<TokenId>, std::vector<TokenId>>, NtId> nt_by_yield;
  PhraseInventory inventory;
  std::vector<SentenceSpans> sentences(b.size());
  std::vector<Production> glue;
  std::map<NtId, std::size_t> glue_index;

  for (std::size_t s = 0; s < b.size(); ++s) {
    const auto& sp = b.pairs[s];
    auto& ss = sentences[s];
    ss.spans = extract_span_pairs(sp, b.alignments[s]);
    const auto n = static_cast<std::uint32_t>(sp.source.size());
    const auto m = static_cast<std::uint32_t>(sp.target.size());
    const SpanPair full{Span{0, n}, Span{0, m}, sp.id};
    if (b.alignments[s].links.empty() && opt.allow_empty_alignment) ss.spans = {full};
    if (std::find(ss.spans.begin(), ss.spans.end(), full) == ss.spans.end()) {
      if (warnings) {
        warnings->push_back("sentence pair " + std::to_string(sp.id) +
                            ": no full-sentence phrase pair, skipped");
      }
      continue;
    }
    ss.usable = true;
    std::sort(ss.spans.begin(), ss.spans.end(), numbering_order);
    ss.src = intern_all(sp.source, vocab);
    ss.tgt = intern_all(sp.target, vocab);
    for (const auto& span : ss.spans) {
      std::vector<TokenId> u(ss.src.begin() + span.source.begin, ss.src.begin() + span.source.end);
      std::vector<TokenId> v(ss.tgt.begin() + span.target.begin, ss.tgt.begin() + span.target.end);
      auto [it, inserted] = nt_by_yield.try_emplace({u, v}, static_cast<NtId>(nts.size()));
      if (inserted) {
        nts.push_back(NonTerminal{"X" + std::to_string(nts.size()), NtKind::plain, PhraseYield{u, v}, Count(0)});
      }
      ss.nts.push_back(it->second);
      ++inventory[phrase_of(sp, span)];
    }
    NtId root = ss.nts[std::find(ss.spans.begin(), ss.spans.end(), full) - ss.spans.begin()];
    auto [g, fresh] = glue_index.try_emplace(root, glue.size());
    if (fresh) {
      Production p;
      p.left = kInitial;
      p.source = {Symbol::gap(1)};
      p.target = {Symbol::gap(1)};
      p.fillers = {root};
      glue.push_back(std::move(p));
    }
    glue[g->second].count += 1;
  }

  // Rule generation is independent per sentence; the merge below runs in sentence order.
  std::vector<std::vector<Production>> per_sentence(b.size());
  const GapRules rules{opt.max_gaps, opt.forbid_adjacent_gaps, std::nullopt};
  parallel_for(b.size(), opt.threads, [&](std::size_t s) {
    const auto& ss = sentences[s];
    if (!ss.usable) return;
    auto& out = per_sentence[s];
    for (std::size_t o = 0; o < ss.spans.size(); ++o) {
      const auto& outer = ss.spans[o];
      Production lex;
      lex.left = ss.nts[o];
      lex.source = terminals(ss.src, outer.source);
      lex.target = terminals(ss.tgt, outer.target);
      out.push_back(std::move(lex));
      if (rules.max_gaps == 0) continue;
      enumerate_gapped(outer, ss.spans, ss.nts, ss.src, ss.tgt, ss.nts[o], rules,
                       [&](Production p) { out.push_back(std::move(p)); });
    }
  });

  std::vector<Production> productions = std::move(glue);
  std::unordered_set<detail::ProductionKey, detail::ProductionKeyHash> seen;
  for (auto& batch : per_sentence) {
    for (auto& p : batch) {
      if (seen.insert(detail::make_key(p)).second) productions.push_back(std::move(p));
    }
    batch.clear();
    batch.shrink_to_fit();
  }
  // Lexical and gapped rules grouped by left-hand side, in discovery order within each.
  std::stable_sort(productions.begin() + static_cast<std::ptrdiff_t>(glue_index.size()), productions.end(),
                   [](const Production& a, const Production& b) { return a.left < b.left; });

  Scfg raw(std::move(vocab), std::move(nts), std::move(productions));
  return distribute_counts(raw, inventory);
}

Scfg distribute_counts(const Scfg& g, const PhraseInventory& inventory) {
  auto nts = g.nonterminals();
  auto productions = g.productions();
  auto strings = [&](const std::vector<TokenId>& ids) {
    std::vector<std::string> out;
    for (auto t : ids) out.push_back(g.vocab().token(t));
    return out;
  };
  for (NtId x = 1; x < nts.size(); ++x) {
    auto& nt = nts[x];
    if (!nt.yield) throw GrammarError("non-terminal " + nt.name + " has no phrase pair to count");
    if (g.by_left(x).empty()) throw GrammarError("non-terminal " + nt.name + " has no productions");
    PhrasePair key{strings(nt.yield->source), strings(nt.yield->target)};
    auto it = inventory.find(key);
    nt.count = it == inventory.end() ? Count(0) : Count(static_cast<unsigned long>(it->second));
    Count share = nt.count / static_cast<unsigned long>(g.by_left(x).size());
    for (auto r : g.by_left(x)) productions[r].count = share;
  }
  if (!nts.empty()) {
    Count glue;
    for (const auto& p : productions) {
      if (p.left == kInitial) glue += p.count;
    }
    nts[kInitial].count = glue;
  }
  return Scfg(g.vocab(), std::move(nts), std::move(productions));
}

bool satisfies_baseline_limits(const Production& p, const BaselineLimits& limits) {
  if (p.arity() > limits.max_gaps) return false;
  if (p.source.size() > limits.max_src_symbols) return false;
  if (!p.has_source_terminal()) return false;
  for (std::size_t i = 1; i < p.source.size(); ++i) {
    if (p.source[i].is_gap() && p.source[i - 1].is_gap()) return false;
  }
  return true;
}

Scfg extract_chiang_baseline(const Bitext& b, const BaselineLimits& limits) {
  constexpr NtId kX = 1;
  Vocabulary vocab;
  std::vector<NonTerminal> nts{NonTerminal{"I", NtKind::initial, std::nullopt, Count(0)},
                               NonTerminal{"X", NtKind::plain, std::nullopt, Count(0)}};
  std::vector<Production> productions;
  std::unordered_map<detail::ProductionKey, std::size_t, detail::ProductionKeyHash> index;
  auto add = [&](Production p, const Count& c) {
    auto key = detail::make_key(p);
    auto [it, fresh] = index.try_emplace(std::move(key), productions.size());
    if (fresh) {
      p.count = 0;
      productions.push_back(std::move(p));
    }
    productions[it->second].count += c;
  };

  if (!b.empty()) {
    Production glue1;
    glue1.left = kInitial;
    glue1.source = glue1.target = {Symbol::gap(1)};
    glue1.fillers = {kX};
    Production glue2;
    glue2.left = kInitial;
    glue2.source = glue2.target = {Symbol::gap(1), Symbol::gap(2)};
    glue2.fillers = {kInitial, kX};
    add(glue1, Count(static_cast<unsigned long>(b.size())));
    add(glue2, Count(static_cast<unsigned long>(b.size())));
  }

  const GapRules rules{limits.max_gaps, true, limits.max_src_symbols};
  for (std::size_t s = 0; s < b.size(); ++s) {
    const auto& sp = b.pairs[s];
    auto spans = extract_span_pairs(sp, b.alignments[s], limits.max_phrase_len);
    auto src = intern_all(sp.source, vocab);
    auto tgt = intern_all(sp.target, vocab);
    const std::vector<NtId> all_x(spans.size(), kX);
    for (const auto& outer : spans) {
      std::vector<Production> rules_here;
      std::unordered_set<detail::ProductionKey, detail::ProductionKeyHash> local;
      auto keep = [&](Production p) {
        if (satisfies_baseline_limits(p, limits) && local.insert(detail::make_key(p)).second) {
          rules_here.push_back(std::move(p));
        }
      };
      Production lex;
      lex.left = kX;
      lex.source = terminals(src, outer.source);
      lex.target = terminals(tgt, outer.target);
      keep(std::move(lex));
      enumerate_gapped(outer, spans, all_x, src, tgt, kX, rules, keep);
      if (rules_here.empty()) continue;
      Count share(1, static_cast<unsigned long>(rules_here.size()));
      for (auto& p : rules_here) add(std::move(p), share);
    }
  }

  for (const auto& p : productions) nts[p.left].count += p.count;
  if (b.empty()) nts.clear();
  return Scfg(std::move(vocab), std::move(nts), std::move(productions));
}

}  // namespace scfg
