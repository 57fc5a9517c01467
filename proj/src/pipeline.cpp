#include "scfg/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "scfg/phrases.hpp"
#include "scfg/rule_table.hpp"

namespace scfg {
namespace {

using Json = nlohmann::json;

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return x;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

Json stats_json(const GrammarStats& s) {
  Json arity = Json::object();
  for (const auto& [k, n] : s.arity_histogram) arity[std::to_string(k)] = n;
  return Json{{"nonterminals", s.nonterminals},
              {"productions", s.productions},
              {"glue_productions", s.glue_productions},
              {"count_mass", format_exact(s.count_mass)},
              {"arity", arity}};
}

const char* method_name(MergeMethod m) {
  switch (m) {
    case MergeMethod::none: return "none";
    case MergeMethod::blue_fringe: return "blue-fringe";
    case MergeMethod::kmedoids: return "kmedoids";
  }
  return "none";
}

}  // namespace

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument("config " + path.string() + " line " + std::to_string(e.line()) + ": " + e.message());
  }
  Settings out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw std::invalid_argument("config " + path.string() + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) out[section + "." + key] = value.get_value<std::string>();
  }
  return out;
}

PipelineConfig configure(const Settings& settings, const std::filesystem::path& base_dir, PipelineConfig cfg) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto both_equivalence = [&](auto fn) {
    fn(cfg.blue_fringe.equivalence);
    fn(cfg.kmedoids.equivalence);
  };
  const std::map<std::string, Setter, std::less<>> setters = {
      {"corpus.src", [&](auto&, auto& v) { cfg.src = resolve(base_dir, v); }},
      {"corpus.tgt", [&](auto&, auto& v) { cfg.tgt = resolve(base_dir, v); }},
      {"corpus.align", [&](auto&, auto& v) { cfg.align = resolve(base_dir, v); }},
      {"corpus.classes",
       [&](auto&, auto& v) {
         if (v.empty()) {
           cfg.classes.reset();
         } else {
           cfg.classes = resolve(base_dir, v);
         }
       }},
      {"corpus.unknown",
       [&](auto& k, auto& v) {
         if (v == "reject") {
           cfg.reserve_unknown_class = false;
         } else if (v == "reserve") {
           cfg.reserve_unknown_class = true;
         } else {
           throw std::invalid_argument(k + ": expected reject or reserve, got '" + v + "'");
         }
       }},
      {"corpus.max_len",
       [&](auto& k, auto& v) {
         const auto n = parse_uint(k, v);
         if (n == 0) {
           cfg.max_len.reset();
         } else {
           cfg.max_len = n;
         }
       }},
      {"extract.mode",
       [&](auto& k, auto& v) {
         if (v == "specialized") {
           cfg.mode = ExtractMode::specialized;
         } else if (v == "baseline") {
           cfg.mode = ExtractMode::baseline;
         } else {
           throw std::invalid_argument(k + ": expected specialized or baseline, got '" + v + "'");
         }
       }},
      {"extract.max_gaps", [&](auto& k, auto& v) { cfg.extract.max_gaps = parse_uint(k, v); }},
      {"extract.forbid_adjacent_gaps", [&](auto& k, auto& v) { cfg.extract.forbid_adjacent_gaps = parse_bool(k, v); }},
      {"extract.allow_empty_alignment",
       [&](auto& k, auto& v) { cfg.extract.allow_empty_alignment = parse_bool(k, v); }},
      {"merge.method",
       [&](auto& k, auto& v) {
         if (v == "none") {
           cfg.method = MergeMethod::none;
         } else if (v == "blue-fringe") {
           cfg.method = MergeMethod::blue_fringe;
         } else if (v == "kmedoids") {
           cfg.method = MergeMethod::kmedoids;
         } else {
           throw std::invalid_argument(k + ": expected none, blue-fringe or kmedoids, got '" + v + "'");
         }
       }},
      {"merge.alpha",
       [&](auto& k, auto& v) {
         const double a = parse_real(k, v);
         if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument(k + ": alpha must lie in (0, 1)");
         both_equivalence([&](EquivalenceOptions& e) { e.alpha = a; });
       }},
      {"merge.fisher_threshold",
       [&](auto& k, auto& v) {
         const double t = parse_real(k, v);
         both_equivalence([&](EquivalenceOptions& e) { e.fisher_threshold = t; });
       }},
      {"merge.strict_recursion",
       [&](auto& k, auto& v) {
         const bool b = parse_bool(k, v);
         both_equivalence([&](EquivalenceOptions& e) { e.strict_recursion = b; });
       }},
      {"merge.recursive_score",
       [&](auto& k, auto& v) {
         const bool b = parse_bool(k, v);
         both_equivalence([&](EquivalenceOptions& e) { e.recursive_score = b; });
       }},
      {"merge.score",
       [&](auto& k, auto& v) {
         if (v == "count") {
           cfg.blue_fringe.score = MergeScore::count;
         } else if (v == "dissim") {
           cfg.blue_fringe.score = MergeScore::dissim;
         } else {
           throw std::invalid_argument(k + ": expected count or dissim, got '" + v + "'");
         }
       }},
      {"merge.random_ties",
       [&](auto& k, auto& v) {
         if (v.empty() || v == "off") {
           cfg.blue_fringe.random_ties_seed.reset();
         } else {
           cfg.blue_fringe.random_ties_seed = parse_uint(k, v);
         }
       }},
      {"merge.top", [&](auto& k, auto& v) { cfg.kmedoids.n_top = parse_uint(k, v); }},
      {"merge.k", [&](auto& k, auto& v) { cfg.kmedoids.k = parse_uint(k, v); }},
      {"merge.seed", [&](auto& k, auto& v) { cfg.kmedoids.seed = parse_uint(k, v); }},
      {"verify.enabled", [&](auto& k, auto& v) { cfg.verify = parse_bool(k, v); }},
      {"verify.max_span_pairs", [&](auto& k, auto& v) { cfg.verify_options.max_span_pairs = parse_uint(k, v); }},
      {"output.dir", [&](auto&, auto& v) { cfg.out_dir = resolve(base_dir, v); }},
      {"output.rule_table", [&](auto&, auto& v) { cfg.rule_table = v; }},
      {"output.grammar", [&](auto&, auto& v) { cfg.grammar = v; }},
      {"output.plan", [&](auto&, auto& v) { cfg.plan = v; }},
      {"output.manifest", [&](auto&, auto& v) { cfg.manifest = v; }},
      {"run.threads",
       [&](auto& k, auto& v) {
         const auto n = parse_uint(k, v);
         if (n == 0) throw std::invalid_argument(k + ": threads must be positive");
         cfg.threads = n;
       }},
  };
  for (const auto& [key, value] : settings) {
    auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (cfg.mode == ExtractMode::baseline && cfg.method != MergeMethod::none) {
    throw std::invalid_argument("merge.method: the baseline grammar has a single non-terminal and cannot be merged");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const Settings& overrides) {
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto settings = read_settings(path);
  for (const auto& [k, v] : overrides) settings[k] = v;
  return configure(settings, base);
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult res;
  Json timings = Json::object();
  auto stage = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.timings.push_back({name, ms});
    timings[name] = ms;
  };

  Bitext bitext;
  stage("corpus", [&] {
    bitext = load_bitext(cfg.src, cfg.tgt, cfg.align);
    if (cfg.classes) {
      bitext = apply_classes(bitext, load_class_map(*cfg.classes, cfg.reserve_unknown_class
                                                                       ? UnknownPolicy::reserved_label
                                                                       : UnknownPolicy::reject));
    }
    if (cfg.max_len) bitext = filter_by_length(bitext, *cfg.max_len);
  });
  res.sentence_pairs = bitext.size();

  Scfg grammar;
  stage("extract", [&] {
    if (cfg.mode == ExtractMode::baseline) {
      grammar = extract_chiang_baseline(bitext);
    } else {
      auto opt = cfg.extract;
      opt.threads = cfg.threads;
      grammar = extract_specialized(bitext, opt, &res.warnings);
    }
  });
  res.extracted = grammar_stats(grammar);

  MergePlan plan(grammar.num_nonterminals());
  Json merge_info{{"method", method_name(cfg.method)}};
  stage("merge", [&] {
    if (cfg.method == MergeMethod::blue_fringe) {
      auto opt = cfg.blue_fringe;
      opt.threads = cfg.threads;
      auto r = blue_fringe(grammar, opt);
      plan = std::move(r.plan);
      merge_info["iterations"] = r.stats.iterations;
      merge_info["promotions"] = r.stats.promotions;
      merge_info["merges"] = r.stats.merges;
    } else if (cfg.method == MergeMethod::kmedoids) {
      auto opt = cfg.kmedoids;
      opt.threads = cfg.threads;
      auto r = kmedoids(grammar, opt);
      plan = std::move(r.plan);
      Json medoids = Json::array();
      for (auto m : r.medoids) medoids.push_back(grammar.nonterminal(m).name);
      merge_info["medoids"] = medoids;
      merge_info["objective"] = r.clustering.objective;
      merge_info["swaps"] = r.clustering.trace.size() - 1;
    }
    merge_info["classes"] = merge_report(plan, grammar).classes.size();
  });

  Scfg scored;
  stage("score", [&] {
    scored = estimate_probabilities(apply_merge_plan(grammar, plan));
    check_normalization(scored);
  });
  res.final_grammar = grammar_stats(scored);

  const auto rules_path = cfg.out_dir / cfg.rule_table;
  const auto dump_path = cfg.out_dir / cfg.grammar;
  const auto plan_path = cfg.out_dir / cfg.plan;
  const auto manifest_path = cfg.out_dir / cfg.manifest;
  stage("export", [&] {
    std::filesystem::create_directories(cfg.out_dir);
    export_rule_table(scored, rules_path);
    write_grammar_dump(scored, dump_path);
    write_plan(plan, grammar, plan_path.string());
  });

  if (cfg.verify) {
    stage("verify", [&] { res.coverage = coverage_report(scored, bitext, cfg.threads, cfg.verify_options); });
  }

  auto opt_path = [](const std::optional<std::filesystem::path>& p) { return p ? Json(p->string()) : Json(nullptr); };
  const auto& eq = cfg.method == MergeMethod::kmedoids ? cfg.kmedoids.equivalence : cfg.blue_fringe.equivalence;
  Json manifest{
      {"inputs", {{"src", cfg.src.string()}, {"tgt", cfg.tgt.string()}, {"align", cfg.align.string()},
                  {"classes", opt_path(cfg.classes)}}},
      {"parameters",
       {{"mode", cfg.mode == ExtractMode::baseline ? "baseline" : "specialized"},
        {"max_len", cfg.max_len ? Json(*cfg.max_len) : Json(nullptr)},
        {"max_gaps", cfg.extract.max_gaps},
        {"forbid_adjacent_gaps", cfg.extract.forbid_adjacent_gaps},
        {"allow_empty_alignment", cfg.extract.allow_empty_alignment},
        {"method", method_name(cfg.method)},
        {"alpha", eq.alpha},
        {"fisher_threshold", eq.fisher_threshold},
        {"strict_recursion", eq.strict_recursion},
        {"recursive_score", eq.recursive_score},
        {"score", cfg.blue_fringe.score == MergeScore::dissim ? "dissim" : "count"},
        {"random_ties", cfg.blue_fringe.random_ties_seed ? Json(*cfg.blue_fringe.random_ties_seed) : Json(nullptr)},
        {"top", cfg.kmedoids.n_top},
        {"k", cfg.kmedoids.k},
        {"seed", cfg.kmedoids.seed},
        {"threads", cfg.threads}}},
      {"corpus", {{"sentence_pairs", res.sentence_pairs}, {"warnings", res.warnings}}},
      {"extracted", stats_json(res.extracted)},
      {"merge", merge_info},
      {"final", stats_json(res.final_grammar)},
      {"outputs", {{"rule_table", rules_path.string()}, {"grammar", dump_path.string()}, {"plan", plan_path.string()}}},
      {"timings_ms", timings},
  };
  if (res.coverage) {
    Json failing = Json::array();
    for (auto id : res.coverage->failing_ids) failing.push_back(id);
    manifest["verify"] = {{"total", res.coverage->total},
                          {"derived", res.coverage->derived},
                          {"coverage", res.coverage->fraction()},
                          {"failing_ids", failing}};
  }
  res.manifest = manifest.dump(2) + "\n";
  try {
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
    out << res.manifest;
  } catch (const std::exception& e) {
    throw PipelineError("manifest", e.what());
  }
  return res;
}

}  // namespace scfg
