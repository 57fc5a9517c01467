#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scfg/equivalence.hpp"
#include "scfg/grammar.hpp"
#include "scfg/merge_plan.hpp"

namespace scfg {

class MergeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Red kernel, blue frontier and white remainder. Red members are class
/// representatives of the current plan.
struct FringeState {
  std::set<NtId> red;
  std::set<NtId> blue;
  std::set<NtId> white;
};

/// Red: non-terminals without gapped productions. Blue: every gap filler of
/// every production is red. White: the rest. The initial symbol is in no set.
FringeState init_fringe(const Scfg& g);

/// Height of each non-terminal's subtree: 0 without gapped productions,
/// otherwise one more than the deepest filler.
std::vector<std::uint32_t> subtree_depths(const Scfg& g);

enum class MergeScore { count, dissim };

struct BlueFringeOptions {
  EquivalenceOptions equivalence;
  MergeScore score = MergeScore::count;
  /// Break ties among the shallowest promotion candidates at random.
  std::optional<std::uint64_t> random_ties_seed;
  std::size_t threads = 1;
};

struct BlueFringeStats {
  std::size_t iterations = 0;
  std::size_t promotions = 0;
  std::size_t merges = 0;
  std::size_t evaluations = 0;
};

struct BlueFringeResult {
  MergePlan plan;
  FringeState state;
  BlueFringeStats stats;
};

/// Repeats until the frontier is empty: evaluate every red-blue pair; promote
/// the shallowest blue without an equivalent red (depth asc, C desc, id asc),
/// or else merge the best-scoring equivalent pair (score desc, D asc, blue id
/// asc, red id asc). Score is C(red)+C(blue), or -D with MergeScore::dissim.
BlueFringeResult blue_fringe(const Scfg& g, const BlueFringeOptions& opt);

struct PamResult {
  std::vector<std::size_t> medoids;     // ascending point indices
  std::vector<std::size_t> assignment;  // point -> position in medoids
  double objective = 0.0;
  std::vector<double> trace;  // objective after init and after each swap
};

/// Greedy initialisation (highest priority first, then the point farthest from
/// the chosen medoids) followed by best-improvement swaps until no swap lowers
/// the summed distance to the nearest medoid. The seed only orders exact ties.
PamResult pam(const std::vector<std::vector<double>>& dist, std::size_t k, const std::vector<double>& priority,
              std::uint64_t seed);

/// Summed distance of every point to its nearest medoid.
double pam_objective(const std::vector<std::vector<double>>& dist, const std::vector<std::size_t>& medoids);

struct KMedoidsOptions {
  std::size_t n_top = 250;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  EquivalenceOptions equivalence;
  std::size_t threads = 1;
};

struct KMedoidsResult {
  MergePlan plan;
  std::vector<NtId> medoids;
  std::vector<NtId> top;
  PamResult clustering;
};

/// Clusters the n_top most frequent plain non-terminals (C desc, id asc) under
/// nt_dissimilarity and attaches every other plain non-terminal to its nearest
/// medoid. n_top is capped at the number of plain non-terminals; k must lie in
/// [1, n_top], otherwise MergeError.
KMedoidsResult kmedoids(const Scfg& g, const KMedoidsOptions& opt);

struct MergeReport {
  struct Class {
    NtId representative;
    std::vector<NtId> members;
    Count count;
  };
  std::size_t nonterminals_before = 0;
  std::size_t nonterminals_after = 0;
  std::vector<Class> classes;  // plain classes ordered by representative
};

MergeReport merge_report(const MergePlan& plan, const Scfg& g);
std::string format_merge_report(const MergeReport& r, const Scfg& g);

/// One line per plain class, `n: rep,member,...` with names; classes ordered by
/// representative id.
void write_plan(const MergePlan& plan, const Scfg& g, std::ostream& out);
void write_plan(const MergePlan& plan, const Scfg& g, const std::string& path);
/// Unlisted non-terminals stay singletons. Throws MergeError on unknown names,
/// repeated members or the initial symbol.
MergePlan read_plan(std::istream& in, const Scfg& g);
MergePlan read_plan_file(const std::string& path, const Scfg& g);

}  // namespace scfg
