#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scfg/count.hpp"
#include "scfg/grammar.hpp"
#include "scfg/merge_plan.hpp"

namespace scfg {

struct EquivalenceOptions {
  double alpha = 0.05;
  /// Fisher replaces Hoeffding when min(C1, C2) is below this many observations.
  double fisher_threshold = 20.0;
  /// Also require the left-hand sides of matched contexts to be equivalent.
  bool strict_recursion = false;
  /// Fold the dissimilarity of matched contexts' left-hand sides into the score.
  bool recursive_score = true;
};

enum class TestKind { hoeffding, fisher };

struct TestOutcome {
  bool differ = false;
  double dissimilarity = 0.0;
  TestKind test_used = TestKind::hoeffding;
};

/// Runs the configured proportion test on c1/C1 vs c2/C2.
TestOutcome compare_proportions(const Count& c1, const Count& C1, const Count& c2, const Count& C2,
                                const EquivalenceOptions& opt);

/// A right-hand-side shape with one marked gap, seen from two non-terminal
/// classes. An absent side has no production of that shape and count 0.
struct ContextPair {
  std::string shape;               // "das [*] ||| the [*]"
  std::vector<NtId> lefts_a;       // left-hand-side classes using the shape with a
  std::vector<NtId> lefts_b;
  std::optional<ProductionId> prod_a;  // first contributing production
  std::optional<ProductionId> prod_b;
  Count c_a;
  Count c_b;

  bool matched() const { return prod_a.has_value() && prod_b.has_value(); }
};

/// Gap-usage profile of every class of a merge plan. Shapes are compared with
/// the other gap fillers read through the plan's partition, and counts of
/// productions that share a shape are added, exactly as they would be after
/// applying the plan. merge() updates only the productions the merge touches.
class ContextIndex {
 public:
  ContextIndex(const Scfg& g, const MergePlan& plan);

  const Scfg& grammar() const { return *g_; }
  NtId class_of(NtId x) const { return class_of_.at(x); }
  const std::vector<NtId>& classes() const { return class_of_; }
  const Count& class_count(NtId cls) const { return class_count_.at(cls); }
  const std::vector<NtId>& members(NtId cls) const { return members_.at(cls); }

  struct Entry {
    Count count;
    std::vector<NtId> lefts;  // distinct left-hand-side classes, ascending
    std::set<std::pair<ProductionId, std::uint32_t>> uses;  // (production, slot)
    std::map<NtId, std::uint32_t> left_uses;

    ProductionId first_production() const { return uses.begin()->first; }
    std::uint32_t slot() const { return uses.begin()->second; }
  };
  struct Profile {
    std::map<std::string, Entry> entries;  // packed shape -> entry
    std::set<std::pair<Count, std::string>, std::greater<>> by_count;
  };
  const Profile& profile(NtId cls) const { return profiles_.at(cls); }

  /// Moves every member of class `absorb` into class `keep`; both must be
  /// distinct plain class representatives.
  void merge(NtId keep, NtId absorb);

 private:
  void add(ProductionId r);
  void remove(ProductionId r);

  const Scfg* g_;
  std::vector<NtId> class_of_;
  std::vector<Count> class_count_;
  std::vector<std::vector<NtId>> members_;
  std::vector<Profile> profiles_;
};

/// Every context of `a` or `b`: matched shapes once, then the shapes only one
/// side uses. Throws std::invalid_argument if a and b are the same class or
/// either is the initial symbol.
std::vector<ContextPair> enumerate_contexts(const ContextIndex& idx, NtId a, NtId b);

/// Dissimilarity and equivalence between classes with memoized results.
/// Not thread-safe; use one evaluator per worker.
class EquivalenceEvaluator {
 public:
  EquivalenceEvaluator(const ContextIndex& idx, EquivalenceOptions opt);

  /// Maximum D over all contexts; with recursive_score, also over the pairs of
  /// distinct left-hand-side classes of matched contexts.
  double dissimilarity(NtId a, NtId b);

  /// No context reports a significant difference (and, with strict_recursion,
  /// the matched contexts' left-hand sides are equivalent too).
  bool equivalent(NtId a, NtId b);

  const EquivalenceOptions& options() const { return opt_; }

 private:
  using Key = std::pair<NtId, NtId>;
  double dissim_rec(NtId a, NtId b, std::set<Key>& visiting, bool& tainted);
  bool equiv_rec(NtId a, NtId b, std::set<Key>& visiting, bool& tainted);

  const ContextIndex& idx_;
  EquivalenceOptions opt_;
  std::map<Key, double> dissim_cache_;
  std::map<Key, bool> equiv_cache_;
};

std::vector<ContextPair> enumerate_contexts(const Scfg& g, NtId a, NtId b);
double nt_dissimilarity(const Scfg& g, NtId a, NtId b, const MergePlan& plan, const EquivalenceOptions& opt = {});
bool equivalent(const Scfg& g, NtId a, NtId b, const EquivalenceOptions& opt, const MergePlan& plan);

}  // namespace scfg
