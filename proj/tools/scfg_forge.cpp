#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scfg/corpus.hpp"
#include "scfg/equivalence.hpp"
#include "scfg/extract.hpp"
#include "scfg/grammar.hpp"
#include "scfg/merge.hpp"
#include "scfg/parallel.hpp"
#include "scfg/phrases.hpp"
#include "scfg/pipeline.hpp"
#include "scfg/proportion_tests.hpp"
#include "scfg/rule_table.hpp"
#include "scfg/verify.hpp"

namespace {

using namespace scfg;

/// Exit status for a verify run that leaves pairs underivable.
constexpr int kNotDerived = 1;
/// Exit status for bad input, bad flags or a failed stage.
constexpr int kFailure = 2;

struct CorpusFlags {
  std::string src, tgt, align, classes;
  std::string unknown = "reject";
  std::optional<std::size_t> max_len;

  void add_to(CLI::App* cmd, bool need_align = true) {
    cmd->add_option("--src", src, "Source sentences, one per line")->required();
    cmd->add_option("--tgt", tgt, "Target sentences, one per line")->required();
    auto* a = cmd->add_option("--align", align, "Pharaoh alignments, one line per pair");
    if (need_align) a->required();
    cmd->add_option("--classes", classes, "token<TAB>class map applied to both sides");
    cmd->add_option("--unknown", unknown, "Tokens missing from the class map")
        ->check(CLI::IsMember({"reject", "reserve"}));
    cmd->add_option("--max-len", max_len, "Drop pairs with a side longer than this");
  }

  Bitext load() const {
    Bitext b = load_bitext(src, tgt, align);
    if (!classes.empty()) {
      b = apply_classes(b, load_class_map(classes, unknown == "reserve" ? UnknownPolicy::reserved_label
                                                                        : UnknownPolicy::reject));
    }
    if (max_len) b = filter_by_length(b, *max_len);
    return b;
  }
};

/// Source and target lines without alignments, for recognition only.
Bitext load_sentences(const CorpusFlags& f) {
  std::ifstream src(f.src), tgt(f.tgt);
  if (!src) throw CorpusError("cannot open " + f.src);
  if (!tgt) throw CorpusError("cannot open " + f.tgt);
  Bitext b;
  std::string s, t;
  std::size_t line = 0;
  while (true) {
    const bool more_s = static_cast<bool>(std::getline(src, s));
    const bool more_t = static_cast<bool>(std::getline(tgt, t));
    if (!more_s && !more_t) break;
    ++line;
    if (more_s != more_t) throw CorpusError("line " + std::to_string(line) + ": source and target differ in length");
    b.add(split_tokens(s), split_tokens(t), {});
  }
  if (!f.classes.empty()) {
    b = apply_classes(b, load_class_map(f.classes, f.unknown == "reserve" ? UnknownPolicy::reserved_label
                                                                          : UnknownPolicy::reject));
  }
  if (f.max_len) b = filter_by_length(b, *f.max_len);
  return b;
}

struct EquivalenceFlags {
  double alpha = 0.05;
  double fisher_threshold = 20.0;
  bool strict_recursion = false;
  bool flat_score = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--fisher-threshold", fisher_threshold, "Use Fisher below this many observations");
    cmd->add_flag("--strict-recursion", strict_recursion, "Require equivalent left-hand sides in shared contexts");
    cmd->add_flag("--flat-score", flat_score, "Leave left-hand-side dissimilarity out of D");
  }

  EquivalenceOptions options() const {
    EquivalenceOptions o;
    o.alpha = alpha;
    o.fisher_threshold = fisher_threshold;
    o.strict_recursion = strict_recursion;
    o.recursive_score = !flat_score;
    return o;
  }
};

/// Opens `path` for writing, or returns std::cout for an empty path.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

Scfg load_grammar(const std::string& dump, const std::string& rules) {
  if (!dump.empty()) return read_grammar_dump(std::filesystem::path(dump));
  if (!rules.empty()) return parse_rule_table(std::filesystem::path(rules));
  throw std::invalid_argument("give --grammar or --rules");
}

NtId nonterminal(const Scfg& g, const std::string& name) {
  auto id = g.find(name);
  if (!id) throw std::invalid_argument("unknown non-terminal " + name);
  return *id;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronous grammar extraction and non-terminal merging"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (default: SCFG_FORGE_THREADS or 1)");

  // phrases dump
  auto* phrases = app.add_subcommand("phrases", "Phrase-pair inventory");
  phrases->require_subcommand(1);
  auto* phrases_dump = phrases->add_subcommand("dump", "Print `u ||| v ||| count` lines");
  CorpusFlags phrases_corpus;
  std::string phrases_out;
  phrases_corpus.add_to(phrases_dump);
  phrases_dump->add_option("--out", phrases_out, "Output file (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract a grammar dump from a bitext");
  CorpusFlags extract_corpus;
  std::string extract_mode = "specialized", extract_out;
  ExtractOptions extract_opt;
  extract_corpus.add_to(extract);
  extract->add_option("--mode", extract_mode, "Grammar family")->check(CLI::IsMember({"specialized", "baseline"}));
  extract->add_option("--max-gaps", extract_opt.max_gaps, "Gaps per production");
  extract->add_flag("--forbid-adjacent-gaps", extract_opt.forbid_adjacent_gaps, "Reject neighbouring source gaps");
  extract->add_flag("--allow-empty-alignment", extract_opt.allow_empty_alignment,
                    "Keep the full pair of unaligned sentence pairs");
  extract->add_option("--out", extract_out, "Grammar dump (default stdout)");

  // merge-bf
  auto* merge_bf = app.add_subcommand("merge-bf", "Blue-Fringe merging; writes a merge plan");
  std::string bf_grammar, bf_plan, bf_score = "count";
  std::optional<std::uint64_t> bf_random_ties;
  EquivalenceFlags bf_eq;
  merge_bf->add_option("--grammar", bf_grammar, "Grammar dump")->required();
  bf_eq.add_to(merge_bf);
  merge_bf->add_option("--score", bf_score, "Merge preference")->check(CLI::IsMember({"count", "dissim"}));
  merge_bf->add_option("--random-ties", bf_random_ties, "Seed for random promotion ties");
  merge_bf->add_option("--plan", bf_plan, "Plan file (default stdout)");

  // merge-km
  auto* merge_km = app.add_subcommand("merge-km", "k-medoids merging; writes a merge plan");
  std::string km_grammar, km_plan;
  KMedoidsOptions km_opt;
  EquivalenceFlags km_eq;
  merge_km->add_option("--grammar", km_grammar, "Grammar dump")->required();
  merge_km->add_option("--top", km_opt.n_top, "Most frequent non-terminals to cluster");
  merge_km->add_option("-k", km_opt.k, "Number of clusters");
  merge_km->add_option("--seed", km_opt.seed, "Tie-break seed");
  km_eq.add_to(merge_km);
  merge_km->add_option("--plan", km_plan, "Plan file (default stdout)");

  // score
  auto* score = app.add_subcommand("score", "Apply a merge plan and estimate probabilities");
  std::string score_grammar, score_plan, score_out;
  score->add_option("--grammar", score_grammar, "Grammar dump")->required();
  score->add_option("--plan", score_plan, "Merge plan (default: no merging)");
  score->add_option("--out", score_out, "Scored grammar dump (default stdout)");

  // export
  auto* exporter = app.add_subcommand("export", "Write the rule table of a scored grammar");
  std::string export_grammar, export_out;
  exporter->add_option("--grammar", export_grammar, "Scored grammar dump")->required();
  exporter->add_option("--out", export_out, "Rule table (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "Grammar summary as key=value lines");
  std::string stats_grammar, stats_rules;
  stats->add_option("--grammar", stats_grammar, "Grammar dump");
  stats->add_option("--rules", stats_rules, "Rule table");

  // verify
  auto* verify = app.add_subcommand("verify", "Check that every sentence pair is derivable (exit 1 if not)");
  CorpusFlags verify_corpus;
  std::string verify_grammar, verify_rules;
  bool emit_tree = false;
  VerifyOptions verify_opt;
  verify->add_option("--grammar", verify_grammar, "Grammar dump");
  verify->add_option("--rules", verify_rules, "Rule table");
  verify_corpus.add_to(verify, false);
  verify->add_flag("--emit-tree", emit_tree, "Print a derivation for every derivable pair");
  verify->add_option("--max-span-pairs", verify_opt.max_span_pairs, "Chart budget per sentence pair");

  // dissim
  auto* dissim = app.add_subcommand("dissim", "Contexts and dissimilarity of two non-terminals");
  std::string dissim_grammar, dissim_plan, dissim_pair;
  EquivalenceFlags dissim_eq;
  dissim->add_option("--grammar", dissim_grammar, "Grammar dump")->required();
  dissim->add_option("--pair", dissim_pair, "Two non-terminals, e.g. X3,X6")->required();
  dissim->add_option("--plan", dissim_plan, "Merge plan to compare under");
  dissim_eq.add_to(dissim);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run extract, merge, score, export and verify from a config");
  std::string pipeline_config;
  std::vector<std::string> pipeline_sets;
  Settings pipeline_flags;
  pipeline->add_option("--config", pipeline_config, "INI config file")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--set", pipeline_sets, "Override a config key: section.key=value");
  auto flag_key = [&](const std::string& flag, const std::string& key, const std::string& help,
                      bool path = false) {
    pipeline->add_option_function<std::string>(
        flag,
        [&pipeline_flags, key, path](const std::string& v) {
          pipeline_flags[key] = path ? std::filesystem::absolute(v).string() : v;
        },
        help);
  };
  flag_key("--src", "corpus.src", "Source sentences", true);
  flag_key("--tgt", "corpus.tgt", "Target sentences", true);
  flag_key("--align", "corpus.align", "Alignments", true);
  flag_key("--classes", "corpus.classes", "Class map", true);
  flag_key("--max-len", "corpus.max_len", "Length filter");
  flag_key("--mode", "extract.mode", "specialized or baseline");
  flag_key("--method", "merge.method", "none, blue-fringe or kmedoids");
  flag_key("--alpha", "merge.alpha", "Significance level");
  flag_key("--fisher-threshold", "merge.fisher_threshold", "Fisher back-off threshold");
  flag_key("--score", "merge.score", "count or dissim");
  flag_key("--random-ties", "merge.random_ties", "Promotion tie seed");
  flag_key("--top", "merge.top", "k-medoids candidates");
  flag_key("-k", "merge.k", "k-medoids clusters");
  flag_key("--seed", "merge.seed", "k-medoids seed");
  flag_key("--out-dir", "output.dir", "Output directory", true);
  pipeline->add_flag_callback("--strict-recursion", [&] { pipeline_flags["merge.strict_recursion"] = "true"; },
                              "Require equivalent left-hand sides");
  pipeline->add_flag_callback("--forbid-adjacent-gaps",
                              [&] { pipeline_flags["extract.forbid_adjacent_gaps"] = "true"; },
                              "Reject neighbouring source gaps");
  pipeline->add_flag_callback("--allow-empty-alignment",
                              [&] { pipeline_flags["extract.allow_empty_alignment"] = "true"; },
                              "Keep the full pair of unaligned sentence pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::size_t threads = resolve_threads(threads_flag);

    if (*phrases_dump) {
      Output out(phrases_out);
      write_phrase_dump(out.stream(), phrase_inventory(phrases_corpus.load()));
      return 0;
    }

    if (*extract) {
      const Bitext b = extract_corpus.load();
      Scfg g;
      if (extract_mode == "baseline") {
        g = extract_chiang_baseline(b);
      } else {
        extract_opt.threads = threads;
        std::vector<std::string> warnings;
        g = extract_specialized(b, extract_opt, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      }
      Output out(extract_out);
      write_grammar_dump(g, out.stream());
      return 0;
    }

    if (*merge_bf) {
      const Scfg g = read_grammar_dump(std::filesystem::path(bf_grammar));
      BlueFringeOptions opt;
      opt.equivalence = bf_eq.options();
      opt.score = bf_score == "dissim" ? MergeScore::dissim : MergeScore::count;
      opt.random_ties_seed = bf_random_ties;
      opt.threads = threads;
      const auto r = blue_fringe(g, opt);
      Output out(bf_plan);
      write_plan(r.plan, g, out.stream());
      std::cerr << format_merge_report(merge_report(r.plan, g), g);
      return 0;
    }

    if (*merge_km) {
      const Scfg g = read_grammar_dump(std::filesystem::path(km_grammar));
      km_opt.equivalence = km_eq.options();
      km_opt.threads = threads;
      const auto r = kmedoids(g, km_opt);
      Output out(km_plan);
      write_plan(r.plan, g, out.stream());
      std::cerr << "objective=" << r.clustering.objective << '\n';
      return 0;
    }

    if (*score) {
      const Scfg g = read_grammar_dump(std::filesystem::path(score_grammar));
      const MergePlan plan = score_plan.empty() ? MergePlan(g.num_nonterminals()) : read_plan_file(score_plan, g);
      const Scfg scored = estimate_probabilities(apply_merge_plan(g, plan));
      check_normalization(scored);
      Output out(score_out);
      write_grammar_dump(scored, out.stream());
      return 0;
    }

    if (*exporter) {
      const Scfg g = read_grammar_dump(std::filesystem::path(export_grammar));
      Output out(export_out);
      export_rule_table(g, out.stream());
      return 0;
    }

    if (*stats) {
      std::cout << format_stats(grammar_stats(load_grammar(stats_grammar, stats_rules)));
      return 0;
    }

    if (*verify) {
      const Scfg g = load_grammar(verify_grammar, verify_rules);
      const Bitext b = verify_corpus.align.empty() ? load_sentences(verify_corpus) : verify_corpus.load();
      const Recognizer rec(g, verify_opt);
      std::vector<std::optional<DerivationTree>> trees(b.size());
      parallel_for(b.size(), threads, [&](std::size_t i) { trees[i] = rec.derive(b.pairs[i]); });
      std::size_t derived = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (trees[i]) {
          ++derived;
          if (emit_tree) std::cout << b.pairs[i].id << '\t' << format_tree(g, *trees[i]) << '\n';
        } else {
          std::cout << "underivable " << b.pairs[i].id << '\n';
        }
      }
      const double fraction = b.empty() ? 0.0 : static_cast<double>(derived) / static_cast<double>(b.size());
      std::cout << "derived=" << derived << " total=" << b.size() << " coverage=" << format_decimal(fraction)
                << '\n';
      return derived == b.size() && !b.empty() ? 0 : kNotDerived;
    }

    if (*dissim) {
      const Scfg g = read_grammar_dump(std::filesystem::path(dissim_grammar));
      const auto comma = dissim_pair.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--pair expects two names separated by a comma");
      const NtId x = nonterminal(g, dissim_pair.substr(0, comma));
      const NtId y = nonterminal(g, dissim_pair.substr(comma + 1));
      const MergePlan plan =
          dissim_plan.empty() ? MergePlan(g.num_nonterminals()) : read_plan_file(dissim_plan, g);
      const auto opt = dissim_eq.options();
      const ContextIndex idx(g, plan);
      const NtId a = idx.class_of(x), b = idx.class_of(y);
      const Count& Ca = idx.class_count(idx.class_of(a));
      const Count& Cb = idx.class_count(idx.class_of(b));
      std::cout << "C(" << g.nonterminal(a).name << ")=" << format_exact(Ca) << " C(" << g.nonterminal(b).name
                << ")=" << format_exact(Cb) << '\n';
      for (const auto& c : enumerate_contexts(idx, a, b)) {
        std::cout << c.shape << " ||| " << format_exact(c.c_a) << " ||| " << format_exact(c.c_b);
        if (Ca > 0 && Cb > 0) {
          const auto t = compare_proportions(c.c_a, Ca, c.c_b, Cb, opt);
          std::cout << " ||| D=" << format_decimal(t.dissimilarity)
                    << (t.test_used == TestKind::fisher ? " fisher" : " hoeffding")
                    << (t.differ ? " differ" : " same");
        }
        std::cout << '\n';
      }
      EquivalenceEvaluator ev(idx, opt);
      std::cout << "dissimilarity=" << format_decimal(ev.dissimilarity(a, b))
                << " threshold=" << format_decimal(dissimilarity_threshold(opt.alpha))
                << " equivalent=" << (ev.equivalent(a, b) ? "true" : "false") << '\n';
      return 0;
    }

    if (*pipeline) {
      Settings overrides = pipeline_flags;
      for (const auto& kv : pipeline_sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects section.key=value, got " + kv);
        overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      if (threads_flag || std::getenv("SCFG_FORGE_THREADS")) overrides["run.threads"] = std::to_string(threads);
      auto cfg = load_pipeline_config(pipeline_config, overrides);
      const auto res = run_pipeline(cfg);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << format_stats(res.final_grammar);
      if (res.coverage) std::cout << "coverage=" << format_decimal(res.coverage->fraction()) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return 0;
}
