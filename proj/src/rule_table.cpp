#include "scfg/rule_table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "scfg/corpus.hpp"

namespace scfg {
namespace {

Count count_field(const std::string& text, const char* what, std::size_t line_no) {
  try {
    return parse_count(text);
  } catch (const std::invalid_argument& e) {
    throw GrammarError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
  }
}

double number_field(const std::string& text, const char* what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw GrammarError(std::string(what) + " line " + std::to_string(line_no) + ": malformed number " + text);
}

constexpr std::string_view kSep = " ||| ";
constexpr std::string_view kDumpHeader = "scfg-forge grammar v1";

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(kSep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + kSep.size();
  }
  return out;
}

/// "[X5,1]" -> ("X5", 1)
std::optional<std::pair<std::string, std::uint32_t>> parse_gap(const std::string& tok) {
  if (tok.size() < 5 || tok.front() != '[' || tok.back() != ']') return std::nullopt;
  auto comma = tok.rfind(',');
  if (comma == std::string::npos || comma < 2) return std::nullopt;
  std::uint32_t slot = 0;
  auto r = std::from_chars(tok.data() + comma + 1, tok.data() + tok.size() - 1, slot);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size() - 1 || slot == 0) return std::nullopt;
  return std::make_pair(tok.substr(1, comma - 1), slot);
}

/// Orders names so X2 precedes X10; other names sort after, alphabetically.
bool name_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) -> std::optional<unsigned long> {
    if (s.size() < 2 || s[0] != 'X') return std::nullopt;
    unsigned long v = 0;
    auto r = std::from_chars(s.data() + 1, s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
  };
  auto na = numeric(a), nb = numeric(b);
  if (na && nb) return *na < *nb;
  if (na != nb) return na.has_value();
  return a < b;
}

struct ParsedSide {
  std::vector<Symbol> symbols;
  std::vector<std::pair<std::uint32_t, std::string>> gaps;  // slot, filler name
};

ParsedSide parse_side(const std::string& text, Vocabulary& vocab) {
  ParsedSide side;
  for (const auto& tok : split_tokens(text)) {
    if (auto gap = parse_gap(tok)) {
      side.symbols.push_back(Symbol::gap(gap->second));
      side.gaps.emplace_back(gap->second, gap->first);
    } else {
      side.symbols.push_back(Symbol::terminal(vocab.intern(tok)));
    }
  }
  return side;
}

struct RawProduction {
  std::string left;
  ParsedSide source, target;
  Count count;
  std::optional<double> probability;
};

/// Builds the grammar once every name is known: I is id 0, the rest in name order.
Scfg assemble(Vocabulary vocab, std::vector<RawProduction> raw,
              std::map<std::string, std::pair<Count, std::optional<PhraseYield>>> declared,
              std::vector<std::string> declared_order, std::size_t line_base) {
  std::vector<std::string> names = declared_order;
  if (names.empty()) {
    std::vector<std::string> found;
    auto add = [&](const std::string& n) { found.push_back(n); };
    for (const auto& r : raw) {
      add(r.left);
      for (const auto& [slot, name] : r.source.gaps) add(name);
    }
    std::sort(found.begin(), found.end(), name_less);
    found.erase(std::unique(found.begin(), found.end()), found.end());
    found.erase(std::remove(found.begin(), found.end(), std::string("I")), found.end());
    if (!found.empty() || !raw.empty()) names.push_back("I");
    names.insert(names.end(), found.begin(), found.end());
  }
  std::map<std::string, NtId> ids;
  std::vector<NonTerminal> nts;
  for (const auto& n : names) {
    NonTerminal nt;
    nt.name = n;
    nt.kind = n == "I" ? NtKind::initial : NtKind::plain;
    if (auto it = declared.find(n); it != declared.end()) {
      nt.count = it->second.first;
      nt.yield = it->second.second;
    }
    ids.emplace(n, static_cast<NtId>(nts.size()));
    nts.push_back(std::move(nt));
  }
  if (!nts.empty() && nts[0].name != "I") throw GrammarError("initial symbol I must be declared first");

  std::vector<Production> productions;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& r = raw[i];
    auto lookup = [&](const std::string& n) {
      auto it = ids.find(n);
      if (it == ids.end()) throw GrammarError("line " + std::to_string(line_base + i) + ": unknown non-terminal " + n);
      return it->second;
    };
    Production p;
    p.left = lookup(r.left);
    p.source = std::move(r.source.symbols);
    p.target = std::move(r.target.symbols);
    std::uint32_t max_slot = 0;
    for (const auto& [slot, name] : r.source.gaps) max_slot = std::max(max_slot, slot);
    p.fillers.assign(max_slot, 0);
    std::vector<bool> set(max_slot, false);
    for (const auto& [slot, name] : r.source.gaps) {
      p.fillers[slot - 1] = lookup(name);
      set[slot - 1] = true;
    }
    if (std::find(set.begin(), set.end(), false) != set.end()) {
      throw GrammarError("production " + std::to_string(i) + ": gap slots are not contiguous");
    }
    for (const auto& [slot, name] : r.target.gaps) {
      if (slot > max_slot || p.fillers[slot - 1] != lookup(name)) {
        throw GrammarError("production " + std::to_string(i) + ": target gap [" + name + "," +
                           std::to_string(slot) + "] does not match the source side");
      }
    }
    p.count = r.count;
    p.probability = r.probability;
    productions.push_back(std::move(p));
  }
  if (declared_order.empty()) {
    // Table input: C(X) is the summed production mass.
    for (const auto& p : productions) nts[p.left].count += p.count;
  }
  return Scfg(std::move(vocab), std::move(nts), std::move(productions));
}

std::string join_tokens(const std::vector<TokenId>& ids, const Vocabulary& v) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ' ';
    s += v.token(ids[i]);
  }
  return s;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GrammarError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot open " + path.string());
  return in;
}

}  // namespace

void export_rule_table(const Scfg& g, std::ostream& out) {
  if (!g.scored()) throw GrammarError("rule table export needs a scored grammar");
  struct Row {
    NtId left;
    std::string src, tgt;
    ProductionId id;
  };
  std::vector<Row> rows;
  rows.reserve(g.num_productions());
  for (ProductionId r = 0; r < g.num_productions(); ++r) {
    const auto& p = g.production(r);
    rows.push_back({p.left, g.render_side(p, true), g.render_side(p, false), r});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.left, a.src, a.tgt, a.id) < std::tie(b.left, b.src, b.tgt, b.id);
  });
  for (const auto& row : rows) {
    const auto& p = g.production(row.id);
    out << g.nonterminal(p.left).name << kSep << row.src << kSep << row.tgt << kSep
        << "count=" << format_decimal(p.count.get_d()) << " prob=" << format_decimal(*p.probability) << kSep
        << "exact=" << format_exact(p.count) << '\n';
  }
}

void export_rule_table(const Scfg& g, const std::filesystem::path& path) {
  auto out = open_out(path);
  export_rule_table(g, out);
}

Scfg parse_rule_table(std::istream& in) {
  Vocabulary vocab;
  std::vector<RawProduction> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < 4) throw GrammarError("rule table line " + std::to_string(line_no) + ": expected 4+ fields");
    RawProduction r;
    r.left = fields[0];
    r.source = parse_side(fields[1], vocab);
    r.target = parse_side(fields[2], vocab);
    std::optional<Count> decimal_count;
    for (const auto& kv : split_tokens(fields[3])) {
      if (kv.rfind("count=", 0) == 0) decimal_count = count_field(kv.substr(6), "rule table", line_no);
      if (kv.rfind("prob=", 0) == 0) r.probability = number_field(kv.substr(5), "rule table", line_no);
    }
    bool have_exact = false;
    for (std::size_t f = 4; f < fields.size(); ++f) {
      if (fields[f].rfind("exact=", 0) == 0) {
        r.count = count_field(fields[f].substr(6), "rule table", line_no);
        have_exact = true;
      }
    }
    if (!have_exact) {
      if (!decimal_count) throw GrammarError("rule table line " + std::to_string(line_no) + ": no count");
      r.count = *decimal_count;
    }
    raw.push_back(std::move(r));
  }
  return assemble(std::move(vocab), std::move(raw), {}, {}, 1);
}

Scfg parse_rule_table(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_rule_table(in);
}

void write_grammar_dump(const Scfg& g, std::ostream& out) {
  out << kDumpHeader << '\n';
  for (const auto& nt : g.nonterminals()) {
    out << "N" << kSep << nt.name << kSep << (nt.kind == NtKind::initial ? "initial" : "plain") << kSep
        << format_exact(nt.count);
    if (nt.yield) {
      out << kSep << join_tokens(nt.yield->source, g.vocab()) << kSep << join_tokens(nt.yield->target, g.vocab());
    }
    out << '\n';
  }
  for (const auto& p : g.productions()) {
    out << "R" << kSep << g.nonterminal(p.left).name << kSep << g.render_side(p, true) << kSep
        << g.render_side(p, false) << kSep << format_exact(p.count);
    if (p.probability) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, *p.probability);
      out << kSep << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void write_grammar_dump(const Scfg& g, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_grammar_dump(g, out);
}

Scfg read_grammar_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDumpHeader) throw GrammarError("not a grammar dump (bad header)");
  Vocabulary vocab;
  std::vector<RawProduction> raw;
  std::map<std::string, std::pair<Count, std::optional<PhraseYield>>> declared;
  std::vector<std::string> order;
  std::size_t line_no = 1;
  std::size_t first_rule_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_fields(line);
    auto bad = [&] { return GrammarError("grammar dump line " + std::to_string(line_no) + ": malformed"); };
    if (f[0] == "N") {
      if (f.size() != 4 && f.size() != 6) throw bad();
      std::optional<PhraseYield> yield;
      if (f.size() == 6) {
        PhraseYield y;
        for (const auto& t : split_tokens(f[4])) y.source.push_back(vocab.intern(t));
        for (const auto& t : split_tokens(f[5])) y.target.push_back(vocab.intern(t));
        yield = std::move(y);
      }
      if ((f[2] == "initial") != (f[1] == "I")) throw bad();
      if (!declared.emplace(f[1], std::make_pair(count_field(f[3], "grammar dump", line_no), std::move(yield))).second) throw bad();
      order.push_back(f[1]);
    } else if (f[0] == "R") {
      if (f.size() != 5 && f.size() != 6) throw bad();
      if (first_rule_line == 0) first_rule_line = line_no;
      RawProduction r;
      r.left = f[1];
      r.source = parse_side(f[2], vocab);
      r.target = parse_side(f[3], vocab);
      r.count = count_field(f[4], "grammar dump", line_no);
      if (f.size() == 6) r.probability = number_field(f[5], "grammar dump", line_no);
      raw.push_back(std::move(r));
    } else {
      throw bad();
    }
  }
  if (!raw.empty() && order.empty()) throw GrammarError("grammar dump has rules but no non-terminals");
  return assemble(std::move(vocab), std::move(raw), std::move(declared), std::move(order), first_rule_line);
}

Scfg read_grammar_dump(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_grammar_dump(in);
}

}  // namespace scfg
