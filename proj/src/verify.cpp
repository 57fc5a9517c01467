#include "scfg/verify.hpp"

#include <algorithm>
#include <numeric>

#include "scfg/parallel.hpp"

namespace scfg {
namespace {

struct Entry {
  NtId nt;
  ProductionId production;
  std::vector<std::uint32_t> child_cells;  // by slot
};

class Chart {
 public:
  Chart(std::uint32_t n, std::uint32_t m) : n_(n), m_(m), cells_(num_spans(n) * num_spans(m)) {}

  static std::size_t num_spans(std::uint32_t len) { return static_cast<std::size_t>(len) * (len + 1) / 2; }

  std::uint32_t span_index(std::uint32_t len, Span s) const {
    // Spans ordered by begin, then end.
    auto b = s.begin;
    return static_cast<std::uint32_t>(b * len - static_cast<std::size_t>(b) * (b - 1) / 2 + (s.end - b - 1));
  }
  std::uint32_t cell(Span s, Span t) const {
    return static_cast<std::uint32_t>(span_index(n_, s) * num_spans(m_) + span_index(m_, t));
  }
  std::vector<Entry>& at(std::uint32_t c) { return cells_[c]; }
  const std::vector<Entry>& at(std::uint32_t c) const { return cells_[c]; }
  const Entry* find(std::uint32_t c, NtId nt) const {
    for (const auto& e : cells_[c]) {
      if (e.nt == nt) return &e;
    }
    return nullptr;
  }

 private:
  std::uint32_t n_, m_;
  std::vector<std::vector<Entry>> cells_;
};

struct Matcher {
  const Production& p;
  const std::vector<TokenId>& src;
  const std::vector<TokenId>& tgt;
  const Chart& chart;
  std::vector<Span> gap_src;
  std::vector<Span> gap_tgt;
  std::vector<std::uint32_t> child_cells;

  bool match_source(std::size_t sym, std::uint32_t pos, std::uint32_t end, Span outer_tgt) {
    if (sym == p.source.size()) return pos == end && match_target(0, outer_tgt.begin, outer_tgt.end);
    const auto remaining = static_cast<std::uint32_t>(p.source.size() - sym);
    if (end - pos < remaining) return false;
    Symbol s = p.source[sym];
    if (s.is_terminal()) return src[pos] == s.token() && match_source(sym + 1, pos + 1, end, outer_tgt);
    for (std::uint32_t len = 1; pos + len + (remaining - 1) <= end; ++len) {
      gap_src[s.slot() - 1] = Span{pos, pos + len};
      if (match_source(sym + 1, pos + len, end, outer_tgt)) return true;
    }
    return false;
  }

  bool match_target(std::size_t sym, std::uint32_t pos, std::uint32_t end) {
    if (sym == p.target.size()) return pos == end;
    const auto remaining = static_cast<std::uint32_t>(p.target.size() - sym);
    if (end - pos < remaining) return false;
    Symbol s = p.target[sym];
    if (s.is_terminal()) return tgt[pos] == s.token() && match_target(sym + 1, pos + 1, end);
    const auto k = s.slot() - 1;
    for (std::uint32_t len = 1; pos + len + (remaining - 1) <= end; ++len) {
      Span t{pos, pos + len};
      auto c = chart.cell(gap_src[k], t);
      if (!chart.find(c, p.fillers[k])) continue;
      gap_tgt[k] = t;
      child_cells[k] = c;
      if (match_target(sym + 1, pos + len, end)) return true;
    }
    return false;
  }
};

}  // namespace

Recognizer::Recognizer(const Scfg& g, VerifyOptions opt) : g_(g), opt_(opt) {
  const auto np = g.num_productions();
  src_terms_.resize(np);
  tgt_terms_.resize(np);
  by_src_token_.resize(g.vocab().size());
  for (ProductionId r = 0; r < np; ++r) {
    const auto& p = g.production(r);
    for (auto s : p.source) if (s.is_terminal()) src_terms_[r].push_back(s.token());
    for (auto s : p.target) if (s.is_terminal()) tgt_terms_[r].push_back(s.token());
    for (auto* v : {&src_terms_[r], &tgt_terms_[r]}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    if (src_terms_[r].empty()) {
      no_src_terminal_.push_back(r);
    } else {
      for (auto t : src_terms_[r]) by_src_token_[t].push_back(r);
    }
  }
}

std::optional<DerivationTree> Recognizer::derive(const SentencePair& sp) const {
  if (g_.empty()) return std::nullopt;
  const auto n = static_cast<std::uint32_t>(sp.source.size());
  const auto m = static_cast<std::uint32_t>(sp.target.size());
  if (n == 0 || m == 0) return std::nullopt;
  const auto cells = Chart::num_spans(n) * Chart::num_spans(m);
  if (cells > opt_.max_span_pairs) {
    throw VerifyBudgetExceeded("sentence pair " + std::to_string(sp.id) + ": " + std::to_string(cells) +
                               " span pairs exceed the budget of " + std::to_string(opt_.max_span_pairs));
  }
  std::vector<TokenId> src, tgt;
  for (const auto& tok : sp.source) {
    auto id = g_.vocab().find(tok);
    if (!id) return std::nullopt;
    src.push_back(*id);
  }
  for (const auto& tok : sp.target) {
    auto id = g_.vocab().find(tok);
    if (!id) return std::nullopt;
    tgt.push_back(*id);
  }

  // Candidate productions: every terminal occurs in the sentence pair.
  std::vector<TokenId> src_set = src, tgt_set = tgt;
  std::sort(src_set.begin(), src_set.end());
  src_set.erase(std::unique(src_set.begin(), src_set.end()), src_set.end());
  std::sort(tgt_set.begin(), tgt_set.end());
  tgt_set.erase(std::unique(tgt_set.begin(), tgt_set.end()), tgt_set.end());
  std::vector<std::uint32_t> hits(g_.num_productions(), 0);
  std::vector<ProductionId> candidates;
  auto target_ok = [&](ProductionId r) {
    return std::includes(tgt_set.begin(), tgt_set.end(), tgt_terms_[r].begin(), tgt_terms_[r].end());
  };
  for (auto t : src_set) {
    for (auto r : by_src_token_[t]) {
      if (++hits[r] == src_terms_[r].size() && target_ok(r)) candidates.push_back(r);
    }
  }
  for (auto r : no_src_terminal_) {
    if (target_ok(r)) candidates.push_back(r);
  }
  std::sort(candidates.begin(), candidates.end());

  Chart chart(n, m);
  std::vector<std::pair<Span, Span>> spans_of(cells);
  std::vector<std::uint32_t> order;
  order.reserve(cells);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j <= n; ++j) {
      for (std::uint32_t k = 0; k < m; ++k) {
        for (std::uint32_t l = k + 1; l <= m; ++l) {
          auto c = chart.cell(Span{i, j}, Span{k, l});
          spans_of[c] = {Span{i, j}, Span{k, l}};
          order.push_back(c);
        }
      }
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return spans_of[a].first.length() + spans_of[a].second.length() <
           spans_of[b].first.length() + spans_of[b].second.length();
  });

  for (auto c : order) {
    const auto [s, t] = spans_of[c];
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto r : candidates) {
        const auto& p = g_.production(r);
        if (chart.find(c, p.left)) continue;
        if (p.source.size() > s.length() || p.target.size() > t.length()) continue;
        if (p.source.front().is_terminal() && p.source.front().token() != src[s.begin]) continue;
        if (p.source.back().is_terminal() && p.source.back().token() != src[s.end - 1]) continue;
        if (p.target.front().is_terminal() && p.target.front().token() != tgt[t.begin]) continue;
        if (p.target.back().is_terminal() && p.target.back().token() != tgt[t.end - 1]) continue;
        Matcher mt{p, src, tgt, chart, std::vector<Span>(p.arity()), std::vector<Span>(p.arity()),
                   std::vector<std::uint32_t>(p.arity())};
        if (mt.match_source(0, s.begin, s.end, t)) {
          chart.at(c).push_back(Entry{p.left, r, mt.child_cells});
          changed = true;
        }
      }
    }
  }

  const auto root_cell = chart.cell(Span{0, n}, Span{0, m});
  if (!chart.find(root_cell, kInitial)) return std::nullopt;

  auto build = [&](auto& self, std::uint32_t cell, NtId nt) -> DerivationTree {
    const Entry* e = chart.find(cell, nt);
    DerivationTree tree;
    tree.production = e->production;
    tree.source = spans_of[cell].first;
    tree.target = spans_of[cell].second;
    const auto& p = g_.production(e->production);
    for (std::size_t k = 0; k < e->child_cells.size(); ++k) {
      tree.children.push_back(self(self, e->child_cells[k], p.fillers[k]));
    }
    return tree;
  };
  return build(build, root_cell, kInitial);
}

std::optional<DerivationTree> derives(const Scfg& g, const SentencePair& sp, const VerifyOptions& opt) {
  return Recognizer(g, opt).derive(sp);
}

CoverageReport coverage_report(const Scfg& g, const Bitext& b, std::size_t threads, const VerifyOptions& opt) {
  Recognizer rec(g, opt);
  std::vector<char> ok(b.size(), 0);
  parallel_for(b.size(), threads, [&](std::size_t i) { ok[i] = rec.derive(b.pairs[i]).has_value(); });
  CoverageReport report;
  report.total = b.size();
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (ok[i]) {
      ++report.derived;
    } else {
      report.failing_ids.push_back(b.pairs[i].id);
    }
  }
  return report;
}

std::string format_tree(const Scfg& g, const DerivationTree& t) {
  const auto& p = g.production(t.production);
  std::string out = "(" + g.nonterminal(p.left).name + " [" + g.render_side(p, true) + " ||| " +
                    g.render_side(p, false) + "]";
  for (const auto& c : t.children) out += " " + format_tree(g, c);
  return out + ")";
}

}  // namespace scfg
