#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "scfg/extract.hpp"
#include "scfg/merge.hpp"

namespace scfg {
namespace {

const Scfg& house() {
  static const Scfg g = extract_specialized(testing::house_bitext());
  return g;
}

NtId id(const std::string& name) { return *house().find(name); }

std::set<NtId> ids(std::initializer_list<const char*> names) {
  std::set<NtId> out;
  for (auto n : names) out.insert(id(n));
  return out;
}

const Scfg& synthetic() {
  static const Scfg g = extract_specialized(testing::synthetic_bitext(100, 5));
  return g;
}

TEST(Fringe, HouseInitialisation) {
  const auto s = init_fringe(house());
  EXPECT_EQ(s.red, ids({"X4", "X5", "X6"}));
  EXPECT_EQ(s.blue, ids({"X2", "X3", "X7"}));
  EXPECT_EQ(s.white, ids({"X1"}));
}

TEST(Fringe, SetsPartitionThePlainNonTerminals) {
  const auto& g = synthetic();
  const auto s = init_fringe(g);
  std::size_t total = s.red.size() + s.blue.size() + s.white.size();
  EXPECT_EQ(total, g.num_nonterminals() - 1);
  for (auto x : s.blue) {
    for (auto r : g.by_left(x)) {
      for (auto f : g.production(r).fillers) EXPECT_TRUE(s.red.count(f));
    }
  }
  EXPECT_FALSE(s.red.count(kInitial) || s.blue.count(kInitial) || s.white.count(kInitial));
}

TEST(Fringe, SubtreeDepths) {
  const auto d = subtree_depths(house());
  EXPECT_EQ(d[id("X4")], 0u);
  EXPECT_EQ(d[id("X5")], 0u);
  EXPECT_EQ(d[id("X6")], 0u);
  EXPECT_EQ(d[id("X2")], 1u);
  EXPECT_EQ(d[id("X3")], 1u);
  EXPECT_EQ(d[id("X7")], 1u);
  EXPECT_EQ(d[id("X1")], 2u);
}

TEST(BlueFringe, House) {
  const auto r = blue_fringe(house(), {});
  EXPECT_TRUE(r.state.blue.empty());
  EXPECT_TRUE(r.plan.same_class(id("X1"), id("X7")));
  EXPECT_FALSE(r.plan.same_class(id("X3"), id("X6")));
  EXPECT_EQ(r.stats.merges, 4u);
  EXPECT_EQ(r.stats.promotions, 0u);
  // Every class is led by a red non-terminal.
  for (NtId x = 1; x < house().num_nonterminals(); ++x) EXPECT_TRUE(r.state.red.count(r.plan.find(x)));
  const auto merged = apply_merge_plan(house(), r.plan);
  EXPECT_NO_THROW(check_normalization(merged));
  EXPECT_EQ(total_count_mass(merged), total_count_mass(house()));
}

TEST(BlueFringe, DissimScoreChangesThePartner) {
  BlueFringeOptions opt;
  opt.score = MergeScore::dissim;
  const auto r = blue_fringe(house(), opt);
  EXPECT_TRUE(r.plan.same_class(id("X1"), id("X7")));
  EXPECT_TRUE(r.plan.same_class(id("X3"), id("X6")));
  EXPECT_TRUE(r.plan.same_class(id("X2"), id("X4")));
  EXPECT_EQ(r.plan.num_classes(), 4u);
}

/// k copies of "d n1" and "d n2": the two frames are used identically.
Bitext two_frames(std::size_t k) {
  Bitext b;
  for (std::size_t i = 0; i < k; ++i) {
    b.add({"d", "n1"}, {"D", "N1"}, AlignmentSet{{{0, 0}, {1, 1}}});
    b.add({"d", "n2"}, {"D", "N2"}, AlignmentSet{{{0, 0}, {1, 1}}});
  }
  return b;
}

TEST(BlueFringe, DuplicatedSubGrammarsMerge) {
  const auto g = extract_specialized(two_frames(30));
  const NtId frame1 = *g.find("X1"), frame2 = *g.find("X4");
  const auto r = blue_fringe(g, {});
  EXPECT_TRUE(r.plan.same_class(frame1, frame2));
  EXPECT_EQ(r.stats.promotions, 1u);
  EXPECT_FALSE(r.plan.same_class(*g.find("X2"), *g.find("X3")));
  EXPECT_FALSE(r.plan.same_class(*g.find("X3"), *g.find("X5")));
}

TEST(BlueFringe, TerminatesWithEveryClassRed) {
  const auto& g = synthetic();
  const auto r = blue_fringe(g, {});
  EXPECT_TRUE(r.state.blue.empty());
  EXPECT_TRUE(r.state.white.empty());
  for (NtId x = 1; x < g.num_nonterminals(); ++x) EXPECT_TRUE(r.state.red.count(r.plan.find(x)));
  EXPECT_EQ(r.plan.find(kInitial), kInitial);
  EXPECT_EQ(r.stats.merges + r.state.red.size(), g.num_nonterminals() - 1);
  EXPECT_LT(r.plan.num_classes(), g.num_nonterminals());
}

TEST(BlueFringe, DeterministicAcrossThreads) {
  const auto& g = synthetic();
  BlueFringeOptions one, four;
  four.threads = 4;
  const auto a = blue_fringe(g, one), b = blue_fringe(g, four);
  EXPECT_EQ(a.plan.classes(), b.plan.classes());
  EXPECT_EQ(a.stats.evaluations, b.stats.evaluations);
}

TEST(BlueFringe, RandomTiesAreReproducible) {
  const auto& g = synthetic();
  BlueFringeOptions opt;
  opt.random_ties_seed = 11;
  EXPECT_EQ(blue_fringe(g, opt).plan.classes(), blue_fringe(g, opt).plan.classes());
}

TEST(BlueFringe, StrictRecursionNeverMergesMore) {
  const auto& g = synthetic();
  BlueFringeOptions strict;
  strict.equivalence.strict_recursion = true;
  const auto r = blue_fringe(g, strict);
  EXPECT_TRUE(r.state.blue.empty());
  EXPECT_GE(r.plan.num_classes(), 2u);
}

TEST(BlueFringe, EmptyGrammar) {
  const auto r = blue_fringe(Scfg(), {});
  EXPECT_EQ(r.plan.size(), 0u);
  EXPECT_EQ(r.stats.iterations, 0u);
}

std::vector<std::vector<double>> euclidean(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::vector<double>> d(pts.size(), std::vector<double>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      d[i][j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    }
  }
  return d;
}

TEST(Pam, SeparatedClustersReachTheOptimum) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> pts;
    for (double cx : {0.0, 50.0, 100.0}) {
      for (int i = 0; i < 4; ++i) pts.emplace_back(cx + jitter(rng), jitter(rng));
    }
    const auto d = euclidean(pts);
    const std::vector<double> priority(pts.size(), 1.0);
    const auto r = pam(d, 3, priority, 0);
    EXPECT_NEAR(r.objective, testing::brute_force_kmedoids(d, 3), 1e-9);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(r.assignment[i], i / 4);
  }
}

TEST(Pam, NeverBelowTheOptimumAndTraceDecreases) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<double, double>> pts(9);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    const auto d = euclidean(pts);
    std::vector<double> priority(pts.size());
    for (auto& p : priority) p = coord(rng);
    const std::size_t k = 1 + trial % 4;
    const auto r = pam(d, k, priority, trial);
    const double best = testing::brute_force_kmedoids(d, k);
    EXPECT_GE(r.objective, best - 1e-9);
    EXPECT_DOUBLE_EQ(r.objective, pam_objective(d, r.medoids));
    EXPECT_TRUE(std::is_sorted(r.medoids.begin(), r.medoids.end()));
    EXPECT_EQ(r.medoids.size(), k);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LT(r.trace[i], r.trace[i - 1]);
    if (k == 1) EXPECT_NEAR(r.objective, best, 1e-9);
  }
}

TEST(Pam, EveryPointAMedoid) {
  std::vector<std::pair<double, double>> pts{{0, 0}, {1, 0}, {5, 5}, {2, 7}};
  const auto d = euclidean(pts);
  const auto r = pam(d, 4, std::vector<double>(4, 0.0), 0);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.medoids, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Pam, HighestPriorityStartsAndSeedsOnlyBreakTies) {
  // All distances equal: no swap helps, so the initial medoids stay.
  std::vector<std::vector<double>> d(5, std::vector<double>(5, 1.0));
  for (std::size_t i = 0; i < 5; ++i) d[i][i] = 0.0;
  const auto r = pam(d, 1, {1, 3, 2, 3, 0}, 0);
  EXPECT_EQ(r.medoids.size(), 1u);
  EXPECT_TRUE(r.medoids[0] == 1 || r.medoids[0] == 3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(pam(d, 1, {1, 3, 2, 3, 0}, seed).medoids, pam(d, 1, {1, 3, 2, 3, 0}, seed).medoids);
  }
  EXPECT_EQ(pam(d, 1, {1, 9, 2, 3, 0}, 4).medoids, std::vector<std::size_t>{1});
}

TEST(Pam, Errors) {
  const std::vector<std::vector<double>> d{{0, 1}, {1, 0}};
  EXPECT_THROW(pam(d, 0, {1, 1}, 0), MergeError);
  EXPECT_THROW(pam(d, 3, {1, 1}, 0), MergeError);
  EXPECT_THROW(pam(d, 1, {1}, 0), MergeError);
  EXPECT_THROW(pam({{0, 1}, {1}}, 1, {1, 1}, 0), MergeError);
}

TEST(KMedoids, ThreeClasses) {
  const auto& g = synthetic();
  KMedoidsOptions opt;
  opt.n_top = 40;
  opt.k = 3;
  const auto r = kmedoids(g, opt);
  EXPECT_EQ(r.top.size(), 40u);
  EXPECT_EQ(r.medoids.size(), 3u);
  EXPECT_EQ(r.plan.num_classes(), 4u);
  for (std::size_t i = 1; i < r.top.size(); ++i) {
    EXPECT_GE(g.nonterminal(r.top[i - 1]).count, g.nonterminal(r.top[i]).count);
  }
  const auto merged = apply_merge_plan(g, r.plan);
  EXPECT_EQ(merged.num_nonterminals(), 4u);
  EXPECT_NO_THROW(check_normalization(merged));
}

TEST(KMedoids, KEqualsTopKeepsTopApart) {
  const auto& g = house();
  KMedoidsOptions opt;
  opt.n_top = 3;
  opt.k = 3;
  const auto r = kmedoids(g, opt);
  EXPECT_EQ(r.clustering.objective, 0.0);
  // X4 and X6 have C = 2; X1 wins the tie among the C = 1 non-terminals.
  EXPECT_EQ(r.top, (std::vector<NtId>{id("X4"), id("X6"), id("X1")}));
  EXPECT_EQ(r.plan.num_classes(), 4u);
}

TEST(KMedoids, TopIsCappedAndKChecked) {
  KMedoidsOptions opt;
  opt.n_top = 250;
  opt.k = 7;
  const auto r = kmedoids(house(), opt);
  EXPECT_EQ(r.top.size(), 7u);
  EXPECT_EQ(r.plan.num_classes(), 8u);
  opt.k = 8;
  EXPECT_THROW(kmedoids(house(), opt), MergeError);
  opt.k = 0;
  EXPECT_THROW(kmedoids(house(), opt), MergeError);
}

TEST(KMedoids, DeterministicAcrossThreads) {
  KMedoidsOptions a, b;
  a.n_top = b.n_top = 30;
  b.threads = 3;
  EXPECT_EQ(kmedoids(synthetic(), a).plan.classes(), kmedoids(synthetic(), b).plan.classes());
}

TEST(PlanIo, RoundTrip) {
  const auto r = blue_fringe(synthetic(), {});
  std::stringstream buf;
  write_plan(r.plan, synthetic(), buf);
  const auto back = read_plan(buf, synthetic());
  EXPECT_EQ(back.classes(), r.plan.classes());
  testing::TempDir dir("plan");
  write_plan(r.plan, synthetic(), dir.file("plan.txt"));
  EXPECT_EQ(read_plan_file(dir.file("plan.txt"), synthetic()).classes(), r.plan.classes());
}

TEST(PlanIo, Format) {
  MergePlan plan(house().num_nonterminals());
  plan.unite(id("X4"), id("X2"));
  plan.unite(id("X1"), id("X7"));
  std::ostringstream out;
  write_plan(plan, house(), out);
  EXPECT_EQ(out.str(), "0: X1,X7\n1: X3\n2: X4,X2\n3: X5\n4: X6\n");
}

TEST(PlanIo, Errors) {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_plan(in, house());
  };
  EXPECT_NO_THROW(read("0: X1,X7\n"));
  EXPECT_THROW(read("0: X1,X99\n"), MergeError);
  EXPECT_THROW(read("0: X1,X7\n1: X7\n"), MergeError);
  EXPECT_THROW(read("0: I,X1\n"), MergeError);
  EXPECT_THROW(read("X1 X7\n"), MergeError);
  EXPECT_THROW(read_plan_file("/nonexistent/plan.txt", house()), MergeError);
}

TEST(MergeReport, House) {
  MergePlan plan(house().num_nonterminals());
  plan.unite(id("X1"), id("X7"));
  const auto r = merge_report(plan, house());
  EXPECT_EQ(r.nonterminals_before, 8u);
  EXPECT_EQ(r.nonterminals_after, 7u);
  ASSERT_EQ(r.classes.size(), 6u);
  EXPECT_EQ(r.classes[0].members, (std::vector<NtId>{id("X1"), id("X7")}));
  EXPECT_EQ(r.classes[0].count, Count(2));
  const auto text = format_merge_report(r, house());
  EXPECT_NE(text.find("nonterminals_after=7"), std::string::npos);
  EXPECT_NE(text.find("X1 size=2 count=2"), std::string::npos);
}

}  // namespace
}  // namespace scfg
