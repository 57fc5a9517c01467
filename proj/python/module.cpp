#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "scfg/corpus.hpp"
#include "scfg/equivalence.hpp"
#include "scfg/extract.hpp"
#include "scfg/grammar.hpp"
#include "scfg/merge.hpp"
#include "scfg/phrases.hpp"
#include "scfg/pipeline.hpp"
#include "scfg/proportion_tests.hpp"
#include "scfg/rule_table.hpp"
#include "scfg/verify.hpp"

namespace py = pybind11;
using namespace scfg;

namespace {

/// Accepts int, str ("1/6") or fractions.Fraction.
Count to_count(const py::object& o) { return parse_count(py::str(o).cast<std::string>()); }

py::object to_fraction(const Count& c) {
  return py::module_::import("fractions").attr("Fraction")(format_exact(c));
}

NtId nt(const Scfg& g, const std::string& name) {
  auto id = g.find(name);
  if (!id) throw py::key_error("unknown non-terminal " + name);
  return *id;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

EquivalenceOptions equivalence_options(double alpha, double fisher_threshold, bool strict_recursion,
                                       bool recursive_score) {
  EquivalenceOptions o;
  o.alpha = alpha;
  o.fisher_threshold = fisher_threshold;
  o.strict_recursion = strict_recursion;
  o.recursive_score = recursive_score;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Synchronous grammar extraction and non-terminal merging";

  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  py::register_exception<GrammarError>(m, "GrammarError", PyExc_ValueError);
  py::register_exception<MergeError>(m, "MergeError", PyExc_ValueError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

  py::class_<Bitext>(m, "Bitext")
      .def(py::init<>())
      .def_static(
          "from_lines",
          [](const std::string& src, const std::string& tgt, const std::string& align) {
            std::istringstream s(src), t(tgt), a(align);
            return read_bitext(s, t, a);
          },
          py::arg("src"), py::arg("tgt"), py::arg("align"), "Parses newline-separated sentences and alignments.")
      .def_static(
          "load",
          [](const std::filesystem::path& src, const std::filesystem::path& tgt, const std::filesystem::path& align) {
            return load_bitext(src, tgt, align);
          },
          py::arg("src"), py::arg("tgt"), py::arg("align"))
      .def("__len__", &Bitext::size)
      .def(
          "pair", [](const Bitext& b, std::size_t i) { return py::make_tuple(join(b.pairs.at(i).source), join(b.pairs.at(i).target)); },
          py::arg("index"))
      .def("filter_by_length", &filter_by_length, py::arg("max_len"));

  py::class_<MergePlan>(m, "MergePlan")
      .def(py::init<std::size_t>(), py::arg("num_nonterminals"))
      .def("find", &MergePlan::find, py::arg("x"))
      .def("unite", &MergePlan::unite, py::arg("keep"), py::arg("absorb"))
      .def("is_identity", &MergePlan::is_identity)
      .def_property_readonly("num_classes", &MergePlan::num_classes)
      .def("classes", &MergePlan::classes)
      .def("__len__", &MergePlan::size);

  py::class_<Scfg>(m, "Grammar")
      .def_static(
          "from_dump", [](const std::string& text) {
            std::istringstream in(text);
            return read_grammar_dump(in);
          },
          py::arg("text"))
      .def_static(
          "from_rule_table", [](const std::string& text) {
            std::istringstream in(text);
            return parse_rule_table(in);
          },
          py::arg("text"))
      .def_property_readonly("num_nonterminals", &Scfg::num_nonterminals)
      .def_property_readonly("num_productions", &Scfg::num_productions)
      .def_property_readonly("scored", &Scfg::scored)
      .def("nonterminals", [](const Scfg& g) {
        std::vector<std::string> names;
        for (const auto& x : g.nonterminals()) names.push_back(x.name);
        return names;
      })
      .def("index", &nt, py::arg("name"))
      .def(
          "count", [](const Scfg& g, const std::string& name) { return to_fraction(g.nonterminal(nt(g, name)).count); },
          py::arg("name"))
      .def("productions",
           [](const Scfg& g) {
             py::list out;
             for (const auto& p : g.productions()) {
               out.append(py::make_tuple(g.nonterminal(p.left).name, g.render_side(p, true),
                                         g.render_side(p, false), to_fraction(p.count),
                                         p.probability ? py::cast(*p.probability) : py::none()));
             }
             return out;
           },
           "(left, source, target, count, probability) per production.")
      .def("stats",
           [](const Scfg& g) {
             const auto s = grammar_stats(g);
             py::dict d;
             d["nonterminals"] = s.nonterminals;
             d["productions"] = s.productions;
             d["glue_productions"] = s.glue_productions;
             d["count_mass"] = to_fraction(s.count_mass);
             d["arity"] = s.arity_histogram;
             return d;
           })
      .def("dump",
           [](const Scfg& g) {
             std::ostringstream out;
             write_grammar_dump(g, out);
             return out.str();
           })
      .def("rule_table",
           [](const Scfg& g) {
             std::ostringstream out;
             export_rule_table(g, out);
             return out.str();
           })
      .def("merge", &apply_merge_plan, py::arg("plan"))
      .def("estimate_probabilities", &estimate_probabilities)
      .def(
          "plan_text", [](const Scfg& g, const MergePlan& plan) {
            std::ostringstream out;
            write_plan(plan, g, out);
            return out.str();
          },
          py::arg("plan"))
      .def(
          "read_plan", [](const Scfg& g, const std::string& text) {
            std::istringstream in(text);
            return read_plan(in, g);
          },
          py::arg("text"));

  m.def(
      "phrase_inventory",
      [](const Bitext& b, std::optional<std::size_t> max_len) {
        std::vector<std::tuple<std::string, std::string, std::uint64_t>> out;
        for (const auto& [pp, n] : phrase_inventory(b, max_len)) out.emplace_back(join(pp.source), join(pp.target), n);
        return out;
      },
      py::arg("bitext"), py::arg("max_len") = py::none(), "(source, target, occurrences) per phrase pair.");

  m.def(
      "extract_specialized",
      [](const Bitext& b, std::size_t max_gaps, bool forbid_adjacent_gaps, bool allow_empty_alignment,
         std::size_t threads) {
        ExtractOptions opt;
        opt.max_gaps = max_gaps;
        opt.forbid_adjacent_gaps = forbid_adjacent_gaps;
        opt.allow_empty_alignment = allow_empty_alignment;
        opt.threads = threads;
        py::gil_scoped_release release;
        return extract_specialized(b, opt);
      },
      py::arg("bitext"), py::arg("max_gaps") = 1, py::arg("forbid_adjacent_gaps") = false,
      py::arg("allow_empty_alignment") = false, py::arg("threads") = 1);

  m.def(
      "extract_baseline", [](const Bitext& b) { return extract_chiang_baseline(b); }, py::arg("bitext"));

  m.def(
      "blue_fringe",
      [](const Scfg& g, double alpha, double fisher_threshold, bool strict_recursion, bool recursive_score,
         const std::string& score, std::optional<std::uint64_t> random_ties, std::size_t threads) {
        BlueFringeOptions opt;
        opt.equivalence = equivalence_options(alpha, fisher_threshold, strict_recursion, recursive_score);
        if (score != "count" && score != "dissim") throw py::value_error("score must be 'count' or 'dissim'");
        opt.score = score == "dissim" ? MergeScore::dissim : MergeScore::count;
        opt.random_ties_seed = random_ties;
        opt.threads = threads;
        py::gil_scoped_release release;
        return blue_fringe(g, opt).plan;
      },
      py::arg("grammar"), py::arg("alpha") = 0.05, py::arg("fisher_threshold") = 20.0,
      py::arg("strict_recursion") = false, py::arg("recursive_score") = true, py::arg("score") = "count",
      py::arg("random_ties") = py::none(), py::arg("threads") = 1);

  m.def(
      "kmedoids",
      [](const Scfg& g, std::size_t top, std::size_t k, std::uint64_t seed, double alpha, double fisher_threshold,
         std::size_t threads) {
        KMedoidsOptions opt;
        opt.n_top = top;
        opt.k = k;
        opt.seed = seed;
        opt.equivalence = equivalence_options(alpha, fisher_threshold, false, true);
        opt.threads = threads;
        py::gil_scoped_release release;
        return kmedoids(g, opt).plan;
      },
      py::arg("grammar"), py::arg("top") = 250, py::arg("k") = 3, py::arg("seed") = 0, py::arg("alpha") = 0.05,
      py::arg("fisher_threshold") = 20.0, py::arg("threads") = 1);

  m.def(
      "dissimilarity",
      [](const py::object& c1, const py::object& C1, const py::object& c2, const py::object& C2) {
        return dissimilarity(to_count(c1), to_count(C1), to_count(c2), to_count(C2));
      },
      py::arg("c1"), py::arg("C1"), py::arg("c2"), py::arg("C2"));
  m.def(
      "hoeffding_differ",
      [](const py::object& c1, const py::object& C1, const py::object& c2, const py::object& C2, double alpha) {
        return hoeffding_differ(to_count(c1), to_count(C1), to_count(c2), to_count(C2), alpha);
      },
      py::arg("c1"), py::arg("C1"), py::arg("c2"), py::arg("C2"), py::arg("alpha"));
  m.def(
      "fisher_differ",
      [](const py::object& c1, const py::object& C1, const py::object& c2, const py::object& C2, double alpha) {
        return fisher_differ(to_count(c1), to_count(C1), to_count(c2), to_count(C2), alpha);
      },
      py::arg("c1"), py::arg("C1"), py::arg("c2"), py::arg("C2"), py::arg("alpha"));
  m.def("fisher_p_value", &fisher_p_value, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
  m.def("dissimilarity_threshold", &dissimilarity_threshold, py::arg("alpha"));

  m.def(
      "nt_dissimilarity",
      [](const Scfg& g, const std::string& a, const std::string& b, std::optional<MergePlan> plan, double alpha) {
        EquivalenceOptions opt;
        opt.alpha = alpha;
        return nt_dissimilarity(g, nt(g, a), nt(g, b), plan.value_or(MergePlan(g.num_nonterminals())), opt);
      },
      py::arg("grammar"), py::arg("a"), py::arg("b"), py::arg("plan") = py::none(), py::arg("alpha") = 0.05);
  m.def(
      "equivalent",
      [](const Scfg& g, const std::string& a, const std::string& b, double alpha, std::optional<MergePlan> plan,
         bool strict_recursion) {
        EquivalenceOptions opt;
        opt.alpha = alpha;
        opt.strict_recursion = strict_recursion;
        return equivalent(g, nt(g, a), nt(g, b), opt, plan.value_or(MergePlan(g.num_nonterminals())));
      },
      py::arg("grammar"), py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05, py::arg("plan") = py::none(),
      py::arg("strict_recursion") = false);

  m.def(
      "derive",
      [](const Scfg& g, const std::string& source, const std::string& target) -> std::optional<std::string> {
        SentencePair sp{split_tokens(source), split_tokens(target), 0};
        auto tree = derives(g, sp);
        if (!tree) return std::nullopt;
        return format_tree(g, *tree);
      },
      py::arg("grammar"), py::arg("source"), py::arg("target"),
      "Bracketed derivation of (source, target), or None.");
  m.def(
      "coverage",
      [](const Scfg& g, const Bitext& b, std::size_t threads) {
        CoverageReport r;
        {
          py::gil_scoped_release release;
          r = coverage_report(g, b, threads);
        }
        py::dict d;
        d["total"] = r.total;
        d["derived"] = r.derived;
        d["fraction"] = r.fraction();
        d["failing_ids"] = r.failing_ids;
        return d;
      },
      py::arg("grammar"), py::arg("bitext"), py::arg("threads") = 1);

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, const Settings& overrides) {
        const auto cfg = load_pipeline_config(config, overrides);
        std::string manifest;
        {
          py::gil_scoped_release release;
          manifest = run_pipeline(cfg).manifest;
        }
        return py::module_::import("json").attr("loads")(manifest);
      },
      py::arg("config"), py::arg("overrides") = Settings{},
      "Runs the configured pipeline and returns its manifest as a dict.");
}
