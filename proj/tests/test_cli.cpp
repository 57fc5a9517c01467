#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "scfg/rule_table.hpp"

namespace scfg {
namespace {

using testing::TempDir;

struct Run {
  int status = -1;
  std::string out;
};

/// Runs the tool with `args` through the shell; stderr is folded into out.
Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = (env.empty() ? "" : "env " + env + " ") + SCFG_FORGE_BIN + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    save_bitext(testing::house_bitext(), dir.file("c.src"), dir.file("c.tgt"), dir.file("c.align"));
  }
  std::string corpus() const {
    return "--src " + dir.file("c.src") + " --tgt " + dir.file("c.tgt") + " --align " + dir.file("c.align");
  }
  std::string extract_house() {
    const auto dump = dir.file("g.dump");
    const auto r = run("extract " + corpus() + " --out " + dump);
    EXPECT_EQ(r.status, 0) << r.out;
    return dump;
  }

  TempDir dir{"cli"};
};

TEST_F(CliTest, PhrasesDumpIsSorted) {
  const auto r = run("phrases dump " + corpus());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out,
            "Haus ||| house ||| 2\n"
            "das Haus ||| the house ||| 1\n"
            "das neue Haus ||| the new house ||| 1\n"
            "das neue ||| the new ||| 1\n"
            "das ||| the ||| 2\n"
            "neue Haus ||| new house ||| 1\n"
            "neue ||| new ||| 1\n");
}

TEST_F(CliTest, ExtractThenStats) {
  const auto dump = extract_house();
  const auto r = run("stats --grammar " + dump);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("nonterminals=8\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("productions=20\n"), std::string::npos) << r.out;
  const auto rendered = testing::render_productions(read_grammar_dump(std::filesystem::path(dump)));
  auto expected = testing::house_productions();
  EXPECT_EQ(std::multiset<std::string>(rendered.begin(), rendered.end()),
            std::multiset<std::string>(expected.begin(), expected.end()));
}

TEST_F(CliTest, BaselineMode) {
  const auto r = run("extract " + corpus() + " --mode baseline --out " + dir.file("b.dump"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(run("stats --grammar " + dir.file("b.dump")).out.find("nonterminals=2\n"), std::string::npos);
}

TEST_F(CliTest, MissingAlignmentNamesThePath) {
  const auto missing = dir.file("absent.align");
  const auto r = run("extract --src " + dir.file("c.src") + " --tgt " + dir.file("c.tgt") + " --align " + missing);
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find(missing), std::string::npos) << r.out;
}

TEST_F(CliTest, BadFlagsFail) {
  EXPECT_NE(run("extract " + corpus() + " --mode fancy").status, 0);
  EXPECT_NE(run("no-such-command").status, 0);
  EXPECT_NE(run("").status, 0);
}

TEST_F(CliTest, DissimPrintsEveryContext) {
  const auto dump = extract_house();
  const auto r = run("dissim --grammar " + dump + " --pair X3,X6");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("C(X3)=1 C(X6)=2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("das [*] ||| the [*] ||| 1/6 ||| 1/3 ||| D=0 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("das neue [*] ||| the new [*] ||| 0 ||| 1/6 ||| D="), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("neue [*] ||| new [*] ||| 0 ||| 1/3 ||| D="), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("equivalent=true\n"), std::string::npos) << r.out;
  EXPECT_NE(run("dissim --grammar " + dump + " --pair X3").status, 0);
  EXPECT_NE(run("dissim --grammar " + dump + " --pair X3,X99").status, 0);
}

TEST_F(CliTest, MergeScoreExportVerify) {
  const auto dump = extract_house();
  const auto plan = dir.file("plan.txt");
  auto r = run("merge-bf --grammar " + dump + " --alpha 1e-2 --plan " + plan);
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_FALSE(slurp(plan).empty());
  r = run("score --grammar " + dump + " --plan " + plan + " --out " + dir.file("s.dump"));
  ASSERT_EQ(r.status, 0) << r.out;
  r = run("export --grammar " + dir.file("s.dump") + " --out " + dir.file("rules.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(slurp(dir.file("rules.txt")).find("prob="), std::string::npos);

  r = run("verify --rules " + dir.file("rules.txt") + " --src " + dir.file("c.src") + " --tgt " + dir.file("c.tgt"));
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("derived=2 total=2 coverage=1\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, ExportNeedsScores) {
  const auto dump = extract_house();
  EXPECT_NE(run("export --grammar " + dump).status, 0);
}

TEST_F(CliTest, MergeKmWritesPlan) {
  const auto dump = extract_house();
  const auto r = run("merge-km --grammar " + dump + " --top 7 -k 3 --seed 7 --plan " + dir.file("km.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto plan = slurp(dir.file("km.txt"));
  EXPECT_NE(plan.find("0: "), std::string::npos);
  EXPECT_NE(plan.find("2: "), std::string::npos);
  EXPECT_EQ(plan.find("3: "), std::string::npos) << plan;
  EXPECT_NE(run("merge-km --grammar " + dump + " --top 7 -k 9").status, 0);
}

TEST_F(CliTest, VerifyExitCodes) {
  const auto dump = extract_house();
  auto r = run("verify --grammar " + dump + " --src " + dir.file("c.src") + " --tgt " + dir.file("c.tgt") +
               " --emit-tree");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("0\t(I [[X1,1] ||| [X1,1]] (X1 ["), std::string::npos) << r.out;

  write(dir.file("o.src"), "Haus das\n");
  write(dir.file("o.tgt"), "the house\n");
  r = run("verify --grammar " + dump + " --src " + dir.file("o.src") + " --tgt " + dir.file("o.tgt"));
  EXPECT_EQ(r.status, 1) << r.out;
  EXPECT_NE(r.out.find("underivable 0\n"), std::string::npos) << r.out;

  r = run("verify --grammar " + dump + " --src " + dir.file("o.src") + " --tgt " + dir.file("nope.tgt"));
  EXPECT_EQ(r.status, 2) << r.out;
}

TEST_F(CliTest, PipelineFlagsOverrideConfig) {
  write(dir.file("run.ini"),
        "[corpus]\nsrc = c.src\ntgt = c.tgt\nalign = c.align\n[merge]\nmethod = none\n[output]\ndir = out\n");
  auto r = run("pipeline --config " + dir.file("run.ini"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("nonterminals=8\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("coverage=1\n"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir.file("out/rules.txt")));
  EXPECT_TRUE(std::filesystem::exists(dir.file("out/manifest.json")));

  r = run("pipeline --config " + dir.file("run.ini") + " --mode baseline");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("nonterminals=2\n"), std::string::npos) << r.out;

  r = run("pipeline --config " + dir.file("run.ini") + " --set extract.mode=baseline");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("nonterminals=2\n"), std::string::npos) << r.out;

  r = run("pipeline --config " + dir.file("run.ini") + " --align " + dir.file("gone.align"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find(dir.file("gone.align")), std::string::npos) << r.out;
}

TEST_F(CliTest, ThreadsFromEnvironment) {
  const auto dump = extract_house();
  const auto one = run("--threads 1 merge-bf --grammar " + dump);
  ASSERT_EQ(one.status, 0) << one.out;
  EXPECT_EQ(run("--threads 4 merge-bf --grammar " + dump).out, one.out);
  EXPECT_EQ(run("merge-bf --grammar " + dump, "SCFG_FORGE_THREADS=3").out, one.out);
  EXPECT_EQ(run("merge-bf --grammar " + dump, "SCFG_FORGE_THREADS=lots").out, one.out);
}

}  // namespace
}  // namespace scfg
