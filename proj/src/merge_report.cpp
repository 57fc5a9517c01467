#include <fstream>
#include <sstream>

#include "scfg/corpus.hpp"
#include "scfg/merge.hpp"

namespace scfg {

MergeReport merge_report(const MergePlan& plan, const Scfg& g) {
  if (plan.size() != g.num_nonterminals()) throw MergeError("merge plan size does not match the grammar");
  MergeReport r;
  r.nonterminals_before = g.num_nonterminals();
  for (const auto& members : plan.classes()) {
    const NtId rep = plan.find(members.front());
    if (rep == kInitial) continue;
    MergeReport::Class c{rep, members, Count(0)};
    for (auto x : members) c.count += g.nonterminal(x).count;
    r.classes.push_back(std::move(c));
  }
  r.nonterminals_after = r.classes.size() + (g.empty() ? 0 : 1);
  return r;
}

std::string format_merge_report(const MergeReport& r, const Scfg& g) {
  std::ostringstream out;
  out << "nonterminals_before=" << r.nonterminals_before << '\n';
  out << "nonterminals_after=" << r.nonterminals_after << '\n';
  out << "classes=" << r.classes.size() << '\n';
  for (const auto& c : r.classes) {
    out << g.nonterminal(c.representative).name << " size=" << c.members.size()
        << " count=" << format_exact(c.count) << '\n';
  }
  return out.str();
}

void write_plan(const MergePlan& plan, const Scfg& g, std::ostream& out) {
  const auto report = merge_report(plan, g);
  std::size_t n = 0;
  for (const auto& c : report.classes) {
    out << n++ << ": " << g.nonterminal(c.representative).name;
    for (auto x : c.members) {
      if (x != c.representative) out << ',' << g.nonterminal(x).name;
    }
    out << '\n';
  }
}

void write_plan(const MergePlan& plan, const Scfg& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MergeError("cannot write plan file " + path);
  write_plan(plan, g, out);
  if (!out) throw MergeError("error writing plan file " + path);
}

MergePlan read_plan(std::istream& in, const Scfg& g) {
  MergePlan plan(g.num_nonterminals());
  std::vector<char> seen(g.num_nonterminals(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw MergeError("plan line " + std::to_string(lineno) + ": missing ':'");
    std::string body = line.substr(colon + 1);
    for (auto& ch : body) {
      if (ch == ',') ch = ' ';
    }
    const auto names = split_tokens(body);
    if (names.empty()) throw MergeError("plan line " + std::to_string(lineno) + ": empty class");
    std::optional<NtId> rep;
    for (const auto& name : names) {
      const auto id = g.find(name);
      if (!id) throw MergeError("plan line " + std::to_string(lineno) + ": unknown non-terminal " + name);
      if (*id == kInitial) throw MergeError("plan line " + std::to_string(lineno) + ": the initial symbol is fixed");
      if (seen[*id]) throw MergeError("plan line " + std::to_string(lineno) + ": " + name + " listed twice");
      seen[*id] = 1;
      if (!rep) {
        rep = *id;
      } else {
        plan.unite(*rep, *id);
      }
    }
  }
  return plan;
}

MergePlan read_plan_file(const std::string& path, const Scfg& g) {
  std::ifstream in(path);
  if (!in) throw MergeError("cannot open plan file " + path);
  return read_plan(in, g);
}

}  // namespace scfg
