#include "scfg/grammar.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "production_key.hpp"

namespace scfg {
namespace {

void canonicalize_slots(Production& p, ProductionId id) {
  auto fail = [&](const std::string& why) {
    return GrammarError("production " + std::to_string(id) + ": " + why);
  };
  const std::size_t n = p.fillers.size();
  std::vector<std::uint32_t> remap(n + 1, 0);
  std::uint32_t next = 1;
  for (auto& s : p.source) {
    if (!s.is_gap()) continue;
    auto old = s.slot();
    if (old == 0 || old > n) throw fail("source slot " + std::to_string(old) + " has no filler");
    if (remap[old] != 0) throw fail("slot " + std::to_string(old) + " repeated on source side");
    remap[old] = next++;
  }
  if (next - 1 != n) throw fail("filler count does not match source gaps");
  std::vector<bool> seen(n + 1, false);
  for (const auto& s : p.target) {
    if (!s.is_gap()) continue;
    auto old = s.slot();
    if (old == 0 || old > n || remap[old] == 0) throw fail("target slot " + std::to_string(old) + " not coupled");
    if (seen[old]) throw fail("slot " + std::to_string(old) + " repeated on target side");
    seen[old] = true;
  }
  for (std::size_t k = 1; k <= n; ++k) {
    if (!seen[k]) throw fail("slot " + std::to_string(k) + " missing on target side");
  }
  std::vector<NtId> fillers(n);
  for (std::size_t k = 1; k <= n; ++k) fillers[remap[k] - 1] = p.fillers[k - 1];
  for (auto& s : p.source) if (s.is_gap()) s = Symbol::gap(remap[s.slot()]);
  for (auto& s : p.target) if (s.is_gap()) s = Symbol::gap(remap[s.slot()]);
  p.fillers = std::move(fillers);
}

}  // namespace

bool Production::has_source_terminal() const {
  return std::any_of(source.begin(), source.end(), [](Symbol s) { return s.is_terminal(); });
}

Scfg::Scfg(Vocabulary vocab, std::vector<NonTerminal> nonterminals, std::vector<Production> productions)
    : vocab_(std::move(vocab)), nonterminals_(std::move(nonterminals)), productions_(std::move(productions)) {
  const auto nv = nonterminals_.size();
  if (nv == 0 && !productions_.empty()) throw GrammarError("productions without non-terminals");
  for (NtId x = 0; x < nv; ++x) {
    bool initial = nonterminals_[x].kind == NtKind::initial;
    if (initial != (x == kInitial)) throw GrammarError("non-terminal 0, and only it, must be initial");
    if (!by_name_.emplace(nonterminals_[x].name, x).second) {
      throw GrammarError("duplicate non-terminal name " + nonterminals_[x].name);
    }
  }
  by_left_.assign(nv, {});
  by_gap_.assign(nv, {});
  for (ProductionId r = 0; r < productions_.size(); ++r) {
    auto& p = productions_[r];
    if (p.left >= nv) throw GrammarError("production " + std::to_string(r) + ": unknown left-hand side");
    if (p.source.empty() || p.target.empty()) {
      throw GrammarError("production " + std::to_string(r) + ": empty right-hand side");
    }
    for (auto f : p.fillers) {
      if (f >= nv) throw GrammarError("production " + std::to_string(r) + ": unknown gap filler");
    }
    for (const auto* side : {&p.source, &p.target}) {
      for (auto s : *side) {
        if (s.is_terminal() && s.token() >= vocab_.size()) {
          throw GrammarError("production " + std::to_string(r) + ": unknown terminal id");
        }
      }
    }
    canonicalize_slots(p, r);
    by_left_[p.left].push_back(r);
    for (std::uint32_t k = 0; k < p.fillers.size(); ++k) by_gap_[p.fillers[k]].push_back({r, k + 1});
  }
}

bool Scfg::scored() const {
  return std::all_of(productions_.begin(), productions_.end(),
                     [](const Production& p) { return p.probability.has_value(); });
}

std::optional<NtId> Scfg::find(std::string_view name) const {
  if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
  return std::nullopt;
}

std::string Scfg::render_side(const Production& p, bool source) const {
  std::string out;
  for (auto s : source ? p.source : p.target) {
    if (!out.empty()) out += ' ';
    if (s.is_gap()) {
      out += '[' + nonterminals_[p.fillers[s.slot() - 1]].name + ',' + std::to_string(s.slot()) + ']';
    } else {
      out += vocab_.token(s.token());
    }
  }
  return out;
}

std::string Scfg::render(const Production& p) const {
  return nonterminals_[p.left].name + " -> (" + render_side(p, true) + " , " + render_side(p, false) + ")";
}

Scfg estimate_probabilities(const Scfg& g) {
  std::vector<Count> mass(g.num_nonterminals());
  for (const auto& p : g.productions()) mass[p.left] += p.count;
  auto productions = g.productions();
  for (auto& p : productions) {
    Count denom = p.left == kInitial ? mass[kInitial] : g.nonterminal(p.left).count;
    if (denom == 0) {
      if (mass[p.left] != 0) {
        throw GrammarError("non-terminal " + g.nonterminal(p.left).name +
                           " has zero count but productions with non-zero count");
      }
      // All productions of this left-hand side carry zero mass: spread uniformly.
      p.probability = 1.0 / static_cast<double>(g.by_left(p.left).size());
      continue;
    }
    Count prob = p.count / denom;
    p.probability = prob.get_d();
  }
  return Scfg(g.vocab(), g.nonterminals(), std::move(productions));
}

GrammarStats grammar_stats(const Scfg& g) {
  GrammarStats s;
  s.nonterminals = g.num_nonterminals();
  s.productions = g.num_productions();
  for (const auto& p : g.productions()) {
    if (p.left == kInitial) {
      ++s.glue_productions;
    } else {
      s.count_mass += p.count;
    }
    ++s.arity_histogram[p.arity()];
  }
  return s;
}

std::string format_stats(const GrammarStats& s) {
  std::ostringstream out;
  out << "nonterminals=" << s.nonterminals << '\n'
      << "productions=" << s.productions << '\n'
      << "glue_productions=" << s.glue_productions << '\n'
      << "count_mass=" << format_exact(s.count_mass) << '\n';
  for (const auto& [arity, n] : s.arity_histogram) out << "arity" << arity << '=' << n << '\n';
  return out.str();
}

Scfg apply_merge_plan(const Scfg& g, const MergePlan& plan) {
  const auto nv = g.num_nonterminals();
  if (plan.size() != nv) {
    throw GrammarError("merge plan covers " + std::to_string(plan.size()) + " non-terminals, grammar has " +
                       std::to_string(nv));
  }
  if (nv == 0) return g;
  if (plan.find(kInitial) != kInitial) throw GrammarError("merge plan moves the initial symbol");
  for (NtId x = 1; x < nv; ++x) {
    if (plan.same_class(x, kInitial)) throw GrammarError("merge plan merges into the initial symbol");
  }

  // New ids: I first, then representatives in ascending old id.
  std::vector<NtId> new_id(nv, 0);
  std::vector<NonTerminal> nts;
  for (NtId x = 0; x < nv; ++x) {
    if (plan.find(x) != x) continue;
    new_id[x] = static_cast<NtId>(nts.size());
    auto nt = g.nonterminal(x);
    nt.count = 0;
    nts.push_back(std::move(nt));
  }
  for (NtId x = 0; x < nv; ++x) {
    NtId rep = plan.find(x);
    new_id[x] = new_id[rep];
    if (x != kInitial) nts[new_id[x]].count += g.nonterminal(x).count;
  }
  nts[kInitial].count = g.nonterminal(kInitial).count;

  std::vector<Production> productions;
  std::unordered_map<detail::ProductionKey, std::size_t, detail::ProductionKeyHash> seen;
  for (const auto& p : g.productions()) {
    Production q;
    q.left = new_id[p.left];
    q.source = p.source;
    q.target = p.target;
    q.fillers.reserve(p.fillers.size());
    for (auto f : p.fillers) q.fillers.push_back(new_id[f]);
    q.count = p.count;
    auto key = detail::make_key(q);
    if (auto it = seen.find(key); it != seen.end()) {
      productions[it->second].count += q.count;
    } else {
      seen.emplace(std::move(key), productions.size());
      productions.push_back(std::move(q));
    }
  }
  return Scfg(g.vocab(), std::move(nts), std::move(productions));
}

Count total_count_mass(const Scfg& g) {
  Count total;
  for (const auto& p : g.productions()) {
    if (p.left != kInitial) total += p.count;
  }
  return total;
}

void check_normalization(const Scfg& g) {
  std::vector<Count> mass(g.num_nonterminals());
  for (const auto& p : g.productions()) mass[p.left] += p.count;
  for (NtId x = 1; x < g.num_nonterminals(); ++x) {
    if (mass[x] != g.nonterminal(x).count) {
      throw GrammarError("non-terminal " + g.nonterminal(x).name + ": productions sum to " +
                         format_exact(mass[x]) + " but C = " + format_exact(g.nonterminal(x).count));
    }
  }
}

}  // namespace scfg
