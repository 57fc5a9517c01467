#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "scfg/corpus.hpp"

namespace scfg {
namespace {

Bitext read(const std::string& src, const std::string& tgt, const std::string& align) {
  std::istringstream s(src), t(tgt), a(align);
  return read_bitext(s, t, a);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

TEST(Corpus, MinimalPair) {
  const auto b = read("a b\n", "x y\n", "0-0 1-1\n");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.pairs[0].source, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(b.pairs[0].target, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(b.alignments[0].links.size(), 2u);
  EXPECT_EQ(b.pairs[0].id, 0u);
}

TEST(Corpus, OutOfRangeLinkNamesLine) {
  try {
    read("a b\n", "x y\n", "5-0\n");
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
}

TEST(Corpus, LineCountMismatch) {
  try {
    read("a\nb\nc\n", "x\ny\n", "0-0\n0-0\n0-0\n");
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;
    EXPECT_NE(msg.find('2'), std::string::npos) << msg;
  }
}

TEST(Corpus, MalformedAndDuplicateLinks) {
  EXPECT_THROW(read("a\n", "x\n", "0_0\n"), CorpusError);
  EXPECT_THROW(read("a\n", "x\n", "0-0 0-0\n"), CorpusError);
  EXPECT_THROW(read("a\n", "x\n", "-1-0\n"), CorpusError);
}

TEST(Corpus, EmptySentenceRejected) { EXPECT_THROW(read("\n", "x\n", "\n"), CorpusError); }

TEST(Corpus, EmptyAlignmentLineAllowed) {
  const auto b = read("a\n", "x\n", "\n");
  EXPECT_TRUE(b.alignments[0].links.empty());
}

TEST(Corpus, SaveLoadRoundTripIsByteIdentical) {
  testing::TempDir dir("corpus");
  const std::string src = "das neue Haus\ndas Haus\n", tgt = "the new house\nthe house\n",
                    align = "0-0 1-1 2-2\n1-1 0-0\n";
  write(dir.file("s"), src);
  write(dir.file("t"), tgt);
  write(dir.file("a"), align);
  const auto b = load_bitext(dir.file("s"), dir.file("t"), dir.file("a"));
  save_bitext(b, dir.file("s2"), dir.file("t2"), dir.file("a2"));
  EXPECT_EQ(slurp(dir.file("s2")), src);
  EXPECT_EQ(slurp(dir.file("t2")), tgt);
  EXPECT_EQ(slurp(dir.file("a2")), align);
}

TEST(Corpus, MissingFileNamesPath) {
  try {
    load_bitext("/nonexistent/src.txt", "/nonexistent/tgt.txt", "/nonexistent/align.txt");
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/"), std::string::npos);
  }
}

TEST(Classes, DirectSubstitution) {
  std::istringstream in("das\tc0\nneue\tc1\nHaus\tc2\nthe\tc0\nnew\tc1\nhouse\tc2\n");
  const auto cm = read_class_map(in);
  const auto b = apply_classes(testing::house_bitext(), cm);
  EXPECT_EQ(b.pairs[0].source, (std::vector<std::string>{"c0", "c1", "c2"}));
  EXPECT_EQ(b.pairs[1].target, (std::vector<std::string>{"c0", "c2"}));
  EXPECT_EQ(b.alignments, testing::house_bitext().alignments);
}

TEST(Classes, IdentityMapLeavesInputUnchanged) {
  std::istringstream in("das\tdas\nneue\tneue\nHaus\tHaus\nthe\tthe\nnew\tnew\nhouse\thouse\n");
  const auto b = testing::house_bitext();
  const auto c = apply_classes(b, read_class_map(in));
  EXPECT_EQ(c.pairs, b.pairs);
  EXPECT_EQ(c.alignments, b.alignments);
}

TEST(Classes, UnknownTokenPolicies) {
  const std::string map = "das\tc0\nneue\tc1\nthe\tc0\nnew\tc1\nhouse\tc2\n";
  {
    std::istringstream in(map);
    try {
      apply_classes(testing::house_bitext(), read_class_map(in));
      FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
      EXPECT_NE(std::string(e.what()).find("Haus"), std::string::npos);
    }
  }
  std::istringstream in(map);
  const auto b = apply_classes(testing::house_bitext(), read_class_map(in, UnknownPolicy::reserved_label));
  EXPECT_EQ(b.pairs[0].source, (std::vector<std::string>{"c0", "c1", "UNK0"}));
}

TEST(Classes, MalformedMap) {
  std::istringstream no_tab("das c0\n");
  EXPECT_THROW(read_class_map(no_tab), CorpusError);
  std::istringstream twice("das\tc0\ndas\tc1\n");
  EXPECT_THROW(read_class_map(twice), CorpusError);
}

TEST(Classes, PreservesLengths) {
  const auto b = testing::synthetic_bitext(30, 4);
  ClassMap cm;
  cm.unknown_policy = UnknownPolicy::reserved_label;
  const auto c = apply_classes(b, cm);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(c.pairs[i].source.size(), b.pairs[i].source.size());
    EXPECT_EQ(c.pairs[i].target.size(), b.pairs[i].target.size());
  }
  EXPECT_EQ(c.alignments, b.alignments);
}

Bitext lengths(std::initializer_list<std::pair<std::size_t, std::size_t>> ls) {
  Bitext b;
  for (auto [n, m] : ls) {
    b.add(std::vector<std::string>(n, "a"), std::vector<std::string>(m, "x"), AlignmentSet{{{0, 0}}});
  }
  return b;
}

TEST(FilterByLength, BoundaryFilter) {
  const auto b = lengths({{5, 5}, {21, 5}, {5, 21}, {20, 20}});
  const auto f = filter_by_length(b, 20);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.pairs[0].source.size(), 5u);
  EXPECT_EQ(f.pairs[1].source.size(), 20u);
  EXPECT_EQ(f.pairs[0].id, 0u);
  EXPECT_EQ(f.pairs[1].id, 1u);
}

TEST(FilterByLength, IdentityAndEmpty) {
  const auto b = lengths({{2, 3}, {4, 1}});
  EXPECT_EQ(filter_by_length(b, 100).pairs, b.pairs);
  EXPECT_TRUE(filter_by_length(lengths({{3, 3}}), 2).empty());
  EXPECT_THROW(filter_by_length(b, 0), std::invalid_argument);
}

TEST(FilterByLength, OutputIsOrderedSubsequence) {
  std::mt19937 rng(5);
  const auto b = testing::random_bitext(rng, 50, 6);
  const auto f = filter_by_length(b, 3);
  std::size_t j = 0;
  for (const auto& p : f.pairs) {
    while (j < b.size() && (b.pairs[j].source != p.source || b.pairs[j].target != p.target)) ++j;
    ASSERT_LT(j, b.size());
    ++j;
  }
}

}  // namespace
}  // namespace scfg
