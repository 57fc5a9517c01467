#include <algorithm>
#include <map>
#include <random>

#include "scfg/merge.hpp"
#include "scfg/parallel.hpp"

namespace scfg {
namespace {

bool has_gapped_production(const Scfg& g, NtId x) {
  for (auto r : g.by_left(x)) {
    if (g.production(r).arity() > 0) return true;
  }
  return false;
}

bool fillers_red(const Scfg& g, NtId x, const MergePlan& plan, const std::set<NtId>& red) {
  for (auto r : g.by_left(x)) {
    for (auto f : g.production(r).fillers) {
      if (!red.count(plan.find(f))) return false;
    }
  }
  return true;
}

void admit_whites(const Scfg& g, const MergePlan& plan, FringeState& s) {
  for (auto it = s.white.begin(); it != s.white.end();) {
    if (fillers_red(g, *it, plan, s.red)) {
      s.blue.insert(*it);
      it = s.white.erase(it);
    } else {
      ++it;
    }
  }
}

/// Admits whites that use a member of `cls` as a filler, the only ones whose
/// eligibility can have changed after `cls` turned red.
void admit_users(const Scfg& g, const MergePlan& plan, const std::vector<NtId>& cls, FringeState& s) {
  std::set<NtId> users;
  for (auto m : cls) {
    for (const auto& use : g.by_gap(m)) {
      const NtId left = g.production(use.production).left;
      if (s.white.count(left)) users.insert(left);
    }
  }
  for (auto w : users) {
    if (fillers_red(g, w, plan, s.red)) {
      s.white.erase(w);
      s.blue.insert(w);
    }
  }
}

}  // namespace

FringeState init_fringe(const Scfg& g) {
  FringeState s;
  for (NtId x = 1; x < g.num_nonterminals(); ++x) {
    (has_gapped_production(g, x) ? s.white : s.red).insert(x);
  }
  admit_whites(g, MergePlan(g.num_nonterminals()), s);
  return s;
}

std::vector<std::uint32_t> subtree_depths(const Scfg& g) {
  const auto n = g.num_nonterminals();
  std::vector<std::uint32_t> depth(n, 0);
  std::vector<char> state(n, 0);  // 0 new, 1 on stack, 2 done
  auto visit = [&](auto& self, NtId x) -> std::uint32_t {
    if (state[x] == 2) return depth[x];
    if (state[x] == 1) throw GrammarError("cyclic gap structure at " + g.nonterminal(x).name);
    state[x] = 1;
    std::uint32_t d = 0;
    for (auto r : g.by_left(x)) {
      for (auto f : g.production(r).fillers) d = std::max(d, self(self, f) + 1);
    }
    state[x] = 2;
    return depth[x] = d;
  };
  for (NtId x = 1; x < n; ++x) visit(visit, x);
  return depth;
}

BlueFringeResult blue_fringe(const Scfg& g, const BlueFringeOptions& opt) {
  const auto n = g.num_nonterminals();
  BlueFringeResult res{MergePlan(n), init_fringe(g), {}};
  if (n == 0) return res;
  auto& plan = res.plan;
  auto& s = res.state;
  const auto depth = subtree_depths(g);
  std::optional<std::mt19937_64> rng;
  if (opt.random_ties_seed) rng.emplace(*opt.random_ties_seed);
  const std::size_t threads = std::max<std::size_t>(1, opt.threads);

  ContextIndex index(g, plan);
  std::map<std::pair<NtId, NtId>, bool> equiv;  // (red, blue) verdicts for the current plan

  while (!s.blue.empty()) {
    ++res.stats.iterations;
    const std::vector<NtId> reds(s.red.begin(), s.red.end());
    const std::vector<NtId> blues(s.blue.begin(), s.blue.end());

    std::vector<std::pair<NtId, NtId>> pending;
    for (auto b : blues) {
      for (auto r : reds) {
        if (!equiv.count({r, b})) pending.emplace_back(r, b);
      }
    }
    std::vector<char> verdict(pending.size(), 0);
    const std::size_t workers = std::min(threads, std::max<std::size_t>(1, pending.size()));
    parallel_for(workers, workers, [&](std::size_t t) {
      EquivalenceEvaluator ev(index, opt.equivalence);
      for (std::size_t i = t; i < pending.size(); i += workers) {
        verdict[i] = ev.equivalent(pending[i].first, pending[i].second);
      }
    });
    res.stats.evaluations += pending.size();
    for (std::size_t i = 0; i < pending.size(); ++i) equiv.emplace(pending[i], verdict[i] != 0);

    std::vector<NtId> lonely;
    std::vector<std::pair<NtId, NtId>> candidates;
    for (auto b : blues) {
      bool any = false;
      for (auto r : reds) {
        if (equiv.at({r, b})) {
          candidates.emplace_back(r, b);
          any = true;
        }
      }
      if (!any) lonely.push_back(b);
    }

    if (!lonely.empty()) {
      std::uint32_t shallowest = UINT32_MAX;
      for (auto b : lonely) shallowest = std::min(shallowest, depth[b]);
      std::vector<NtId> tied;
      for (auto b : lonely) {
        if (depth[b] == shallowest) tied.push_back(b);
      }
      NtId pick;
      if (rng) {
        pick = tied[(*rng)() % tied.size()];
      } else {
        pick = *std::min_element(tied.begin(), tied.end(), [&](NtId a, NtId b) {
          const auto& ca = index.class_count(a);
          const auto& cb = index.class_count(b);
          if (ca != cb) return ca > cb;
          return a < b;
        });
      }
      s.blue.erase(pick);
      s.red.insert(pick);
      ++res.stats.promotions;
      admit_users(g, plan, index.members(pick), s);
    } else {
      EquivalenceEvaluator serial(index, opt.equivalence);
      std::map<std::pair<NtId, NtId>, double> dissim;
      auto d_of = [&](std::pair<NtId, NtId> rb) {
        auto it = dissim.find(rb);
        if (it == dissim.end()) it = dissim.emplace(rb, serial.dissimilarity(rb.first, rb.second)).first;
        return it->second;
      };
      auto count_of = [&](std::pair<NtId, NtId> rb) {
        return Count(index.class_count(rb.first) + index.class_count(rb.second));
      };
      std::vector<std::pair<NtId, NtId>> best;
      if (opt.score == MergeScore::count) {
        Count top = -1;
        for (auto rb : candidates) top = std::max(top, count_of(rb));
        for (auto rb : candidates) {
          if (count_of(rb) == top) best.push_back(rb);
        }
      } else {
        best = candidates;
      }
      const auto chosen = *std::min_element(best.begin(), best.end(), [&](auto x, auto y) {
        const double dx = d_of(x), dy = d_of(y);
        if (dx != dy) return dx < dy;
        if (x.second != y.second) return x.second < y.second;
        return x.first < y.first;
      });
      const auto [red, blue] = chosen;
      const std::vector<NtId> absorbed = index.members(blue);
      plan.unite(red, blue);
      index.merge(red, blue);
      s.blue.erase(blue);
      ++res.stats.merges;
      // Shapes change for the red class and for classes that share a
      // production with a member of the absorbed blue.
      std::set<NtId> touched{red, blue};
      for (auto m : absorbed) {
        for (const auto& use : g.by_gap(m)) {
          for (auto f : g.production(use.production).fillers) touched.insert(index.class_of(f));
        }
      }
      if (opt.equivalence.strict_recursion) {
        equiv.clear();
      } else {
        std::erase_if(equiv, [&](const auto& kv) {
          return touched.count(kv.first.first) || touched.count(kv.first.second);
        });
      }
      admit_users(g, plan, absorbed, s);
    }
  }
  return res;
}

}  // namespace scfg
