#include "scfg/equivalence.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "scfg/proportion_tests.hpp"

namespace scfg {
namespace {

constexpr std::int64_t kHole = -1;
constexpr std::int64_t kSeparator = INT64_MIN;
constexpr std::int64_t kTargetSlotBase = std::int64_t{1} << 40;

void append(std::string& out, std::int64_t v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); }

/// Source side spells out the classes of the other gaps; the target side only
/// refers to slots, which are numbered in source order.
std::string context_key(const Production& p, std::uint32_t hole, const std::vector<NtId>& class_of) {
  std::string key;
  key.reserve((p.source.size() + p.target.size() + 1) * sizeof(std::int64_t));
  for (auto s : p.source) {
    if (s.is_terminal()) {
      append(key, s.code());
    } else if (s.slot() == hole) {
      append(key, kHole);
    } else {
      append(key, -2 - static_cast<std::int64_t>(class_of[p.fillers[s.slot() - 1]]));
    }
  }
  append(key, kSeparator);
  for (auto s : p.target) append(key, s.is_terminal() ? s.code() : -(kTargetSlotBase + s.slot()));
  return key;
}

std::string render_shape(const Scfg& g, const Production& p, std::uint32_t hole, const std::vector<NtId>& class_of) {
  auto side = [&](const std::vector<Symbol>& syms) {
    std::string out;
    for (auto s : syms) {
      if (!out.empty()) out += ' ';
      if (s.is_terminal()) {
        out += g.vocab().token(s.token());
      } else if (s.slot() == hole) {
        out += "[*]";
      } else {
        out += "[" + g.nonterminal(class_of[p.fillers[s.slot() - 1]]).name + "," + std::to_string(s.slot()) + "]";
      }
    }
    return out;
  };
  return side(p.source) + " ||| " + side(p.target);
}

void insert_sorted(std::vector<NtId>& v, NtId x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

std::pair<NtId, NtId> ordered(NtId a, NtId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

TestOutcome compare_proportions(const Count& c1, const Count& C1, const Count& c2, const Count& C2,
                                const EquivalenceOptions& opt) {
  TestOutcome out;
  out.dissimilarity = dissimilarity(c1, C1, c2, C2);
  const Count smaller = std::min(C1, C2);
  if (smaller < Count(opt.fisher_threshold)) {
    out.test_used = TestKind::fisher;
    // A context count can exceed C after rounding; cap so the table stays valid.
    out.differ = fisher_differ(std::min(c1, C1), C1, std::min(c2, C2), C2, opt.alpha);
  } else {
    out.test_used = TestKind::hoeffding;
    out.differ = out.dissimilarity >= dissimilarity_threshold(opt.alpha);
  }
  return out;
}

ContextIndex::ContextIndex(const Scfg& g, const MergePlan& plan) : g_(&g) {
  const auto n = g.num_nonterminals();
  if (plan.size() != n) throw std::invalid_argument("merge plan size does not match the grammar");
  class_of_.resize(n);
  class_count_.assign(n, Count(0));
  members_.resize(n);
  profiles_.resize(n);
  for (NtId x = 0; x < n; ++x) {
    class_of_[x] = plan.find(x);
    class_count_[class_of_[x]] += g.nonterminal(x).count;
    members_[class_of_[x]].push_back(x);
  }
  for (ProductionId r = 0; r < g.num_productions(); ++r) add(r);
}

void ContextIndex::add(ProductionId r) {
  const auto& p = g_->production(r);
  const NtId left = class_of_[p.left];
  for (std::uint32_t slot = 1; slot <= p.arity(); ++slot) {
    auto& prof = profiles_[class_of_[p.fillers[slot - 1]]];
    auto key = context_key(p, slot, class_of_);
    auto [it, fresh] = prof.entries.try_emplace(key);
    auto& e = it->second;
    if (!fresh) prof.by_count.erase({e.count, key});
    e.count += p.count;
    e.uses.emplace(r, slot);
    if (e.left_uses[left]++ == 0) insert_sorted(e.lefts, left);
    prof.by_count.emplace(e.count, std::move(key));
  }
}

void ContextIndex::remove(ProductionId r) {
  const auto& p = g_->production(r);
  const NtId left = class_of_[p.left];
  for (std::uint32_t slot = 1; slot <= p.arity(); ++slot) {
    auto& prof = profiles_[class_of_[p.fillers[slot - 1]]];
    const auto key = context_key(p, slot, class_of_);
    auto it = prof.entries.find(key);
    auto& e = it->second;
    prof.by_count.erase({e.count, key});
    e.uses.erase({r, slot});
    if (e.uses.empty()) {
      prof.entries.erase(it);
      continue;
    }
    e.count -= p.count;
    if (--e.left_uses[left] == 0) {
      e.left_uses.erase(left);
      e.lefts.erase(std::lower_bound(e.lefts.begin(), e.lefts.end(), left));
    }
    prof.by_count.emplace(e.count, key);
  }
}

void ContextIndex::merge(NtId keep, NtId absorb) {
  if (keep == absorb || keep == kInitial || absorb == kInitial || class_of_.at(keep) != keep ||
      class_of_.at(absorb) != absorb) {
    throw std::invalid_argument("merge needs two distinct plain class representatives");
  }
  std::set<ProductionId> touched;
  for (auto m : members_[absorb]) {
    for (auto r : g_->by_left(m)) touched.insert(r);
    for (const auto& use : g_->by_gap(m)) touched.insert(use.production);
  }
  for (auto r : touched) remove(r);
  for (auto m : members_[absorb]) class_of_[m] = keep;
  auto& into = members_[keep];
  into.insert(into.end(), members_[absorb].begin(), members_[absorb].end());
  std::sort(into.begin(), into.end());
  members_[absorb].clear();
  class_count_[keep] += class_count_[absorb];
  class_count_[absorb] = 0;
  for (auto r : touched) add(r);
}

namespace {

/// Visits the contexts that decide a comparison of classes ca and cb: every
/// context of the class with fewer shapes, with its partner if there is one,
/// then the shapes only the other class uses in order of decreasing count.
/// The visitor gets (count in ca, count in cb, entry in ca or null, entry in cb
/// or null, whether the shape is an unmatched one of the larger class) and
/// returns false to stop. With `first_unmatched`, only the most
/// frequent unmatched shape of the larger class is visited: D and the Hoeffding
/// test are monotone in that count, so rarer shapes cannot decide.
template <typename Visit>
void scan_contexts(const ContextIndex& idx, NtId ca, NtId cb, bool first_unmatched, Visit&& visit) {
  const auto& pa = idx.profile(ca);
  const auto& pb = idx.profile(cb);
  const bool a_small = pa.entries.size() <= pb.entries.size();
  const auto& small = a_small ? pa : pb;
  const auto& large = a_small ? pb : pa;
  const Count zero(0);
  auto emit = [&](const ContextIndex::Entry* s, const ContextIndex::Entry* l, bool tail) {
    const auto* ea = a_small ? s : l;
    const auto* eb = a_small ? l : s;
    return visit(ea ? ea->count : zero, eb ? eb->count : zero, ea, eb, tail);
  };
  for (const auto& [key, e] : small.entries) {
    auto it = large.entries.find(key);
    if (!emit(&e, it == large.entries.end() ? nullptr : &it->second, false)) return;
  }
  for (const auto& [count, key] : large.by_count) {
    if (small.entries.count(key)) continue;
    if (!emit(nullptr, &large.entries.at(key), true) || first_unmatched) return;
  }
}

void check_pair(NtId ca, NtId cb) {
  if (ca == kInitial || cb == kInitial) throw std::invalid_argument("the initial symbol has no contexts");
  if (ca == cb) throw std::invalid_argument("contexts need two distinct classes");
}

}  // namespace

std::vector<ContextPair> enumerate_contexts(const ContextIndex& idx, NtId a, NtId b) {
  const auto& g = idx.grammar();
  const NtId ca = idx.class_of(a), cb = idx.class_of(b);
  check_pair(ca, cb);
  const auto& pa = idx.profile(ca);
  const auto& pb = idx.profile(cb);
  auto shape = [&](const ContextIndex::Entry& e) {
    return render_shape(g, g.production(e.first_production()), e.slot(), idx.classes());
  };
  std::vector<ContextPair> matched, only_a, only_b;
  for (const auto& [key, e] : pa.entries) {
    ContextPair c;
    c.shape = shape(e);
    c.lefts_a = e.lefts;
    c.prod_a = e.first_production();
    c.c_a = e.count;
    if (auto it = pb.entries.find(key); it != pb.entries.end()) {
      const auto& f = it->second;
      c.lefts_b = f.lefts;
      c.prod_b = f.first_production();
      c.c_b = f.count;
      matched.push_back(std::move(c));
    } else {
      only_a.push_back(std::move(c));
    }
  }
  for (const auto& [key, f] : pb.entries) {
    if (pa.entries.count(key)) continue;
    ContextPair c;
    c.shape = shape(f);
    c.lefts_b = f.lefts;
    c.prod_b = f.first_production();
    c.c_b = f.count;
    only_b.push_back(std::move(c));
  }
  auto by_production = [](const ContextPair& x, const ContextPair& y) {
    return std::tie(x.prod_a, x.prod_b, x.shape) < std::tie(y.prod_a, y.prod_b, y.shape);
  };
  std::sort(matched.begin(), matched.end(), by_production);
  std::sort(only_a.begin(), only_a.end(), by_production);
  std::sort(only_b.begin(), only_b.end(), by_production);
  matched.insert(matched.end(), std::make_move_iterator(only_a.begin()), std::make_move_iterator(only_a.end()));
  matched.insert(matched.end(), std::make_move_iterator(only_b.begin()), std::make_move_iterator(only_b.end()));
  return matched;
}

EquivalenceEvaluator::EquivalenceEvaluator(const ContextIndex& idx, EquivalenceOptions opt) : idx_(idx), opt_(opt) {}

double EquivalenceEvaluator::dissimilarity(NtId a, NtId b) {
  std::set<Key> visiting;
  bool tainted = false;
  return dissim_rec(a, b, visiting, tainted);
}

bool EquivalenceEvaluator::equivalent(NtId a, NtId b) {
  std::set<Key> visiting;
  bool tainted = false;
  return equiv_rec(a, b, visiting, tainted);
}

double EquivalenceEvaluator::dissim_rec(NtId a, NtId b, std::set<Key>& visiting, bool& tainted) {
  const NtId ca = idx_.class_of(a), cb = idx_.class_of(b);
  if (ca == cb) return 0.0;
  check_pair(ca, cb);
  const Key key = ordered(ca, cb);
  if (auto it = dissim_cache_.find(key); it != dissim_cache_.end()) return it->second;
  if (visiting.count(key)) {
    tainted = true;
    return 0.0;
  }
  const auto& Ca = idx_.class_count(ca);
  const auto& Cb = idx_.class_count(cb);
  const bool counted = Ca > 0 && Cb > 0;
  std::vector<std::pair<const ContextIndex::Entry*, const ContextIndex::Entry*>> recurse;
  double best = 0.0;
  scan_contexts(idx_, ca, cb, true, [&](const Count& c_a, const Count& c_b, const auto* ea, const auto* eb, bool) {
    if (counted) best = std::max(best, scfg::dissimilarity(c_a, Ca, c_b, Cb));
    if (opt_.recursive_score && ea && eb) recurse.emplace_back(ea, eb);
    return true;
  });
  bool local = false;
  if (!recurse.empty()) {
    visiting.insert(key);
    for (const auto& [ea, eb] : recurse) {
      for (auto la : ea->lefts) {
        for (auto lb : eb->lefts) {
          if (la == lb || la == kInitial || lb == kInitial) continue;
          best = std::max(best, dissim_rec(la, lb, visiting, local));
        }
      }
    }
    visiting.erase(key);
  }
  if (!local) dissim_cache_.emplace(key, best);
  tainted = tainted || local;
  return best;
}

bool EquivalenceEvaluator::equiv_rec(NtId a, NtId b, std::set<Key>& visiting, bool& tainted) {
  const NtId ca = idx_.class_of(a), cb = idx_.class_of(b);
  if (ca == cb) return true;
  check_pair(ca, cb);
  const Key key = ordered(ca, cb);
  if (auto it = equiv_cache_.find(key); it != equiv_cache_.end()) return it->second;
  if (visiting.count(key)) {
    tainted = true;
    return true;
  }
  const auto& Ca = idx_.class_count(ca);
  const auto& Cb = idx_.class_count(cb);
  bool result = true;
  std::vector<std::pair<const ContextIndex::Entry*, const ContextIndex::Entry*>> matched;
  if (Ca > 0 && Cb > 0) {
    // The Fisher p-value is not monotone in the count of an unmatched shape, so
    // every distinct rounded count is tested; a count that rounds to 0 gives p = 1.
    const bool fisher = std::min(Ca, Cb) < Count(opt_.fisher_threshold);
    std::optional<long> last_rounded;
    scan_contexts(idx_, ca, cb, !fisher,
                  [&](const Count& c_a, const Count& c_b, const auto* ea, const auto* eb, bool tail) {
      if (fisher && tail) {
        const long k = round_half_up(ea ? std::min(c_a, Ca) : std::min(c_b, Cb));
        if (k == 0) return false;
        if (last_rounded == k) return true;
        last_rounded = k;
      }
      if (compare_proportions(c_a, Ca, c_b, Cb, opt_).differ) {
        result = false;
        return false;
      }
      if (ea && eb) matched.emplace_back(ea, eb);
      return true;
    });
  }
  bool local = false;
  if (result && opt_.strict_recursion) {
    visiting.insert(key);
    for (const auto& [ea, eb] : matched) {
      for (auto la : ea->lefts) {
        for (auto lb : eb->lefts) {
          if (la == lb || la == kInitial || lb == kInitial) continue;
          if (!equiv_rec(la, lb, visiting, local)) {
            result = false;
            break;
          }
        }
        if (!result) break;
      }
      if (!result) break;
    }
    visiting.erase(key);
  }
  if (!local) equiv_cache_.emplace(key, result);
  tainted = tainted || local;
  return result;
}

std::vector<ContextPair> enumerate_contexts(const Scfg& g, NtId a, NtId b) {
  const MergePlan plan(g.num_nonterminals());
  const ContextIndex idx(g, plan);
  return enumerate_contexts(idx, a, b);
}

double nt_dissimilarity(const Scfg& g, NtId a, NtId b, const MergePlan& plan, const EquivalenceOptions& opt) {
  if (a == kInitial || b == kInitial) throw std::invalid_argument("the initial symbol is not comparable");
  const ContextIndex idx(g, plan);
  EquivalenceEvaluator ev(idx, opt);
  return ev.dissimilarity(a, b);
}

bool equivalent(const Scfg& g, NtId a, NtId b, const EquivalenceOptions& opt, const MergePlan& plan) {
  if (a == kInitial || b == kInitial) throw std::invalid_argument("the initial symbol is not comparable");
  const ContextIndex idx(g, plan);
  EquivalenceEvaluator ev(idx, opt);
  return ev.equivalent(a, b);
}

}  // namespace scfg
