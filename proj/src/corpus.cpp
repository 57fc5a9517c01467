#include "scfg/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace scfg {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw CorpusError("cannot open " + p.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw CorpusError("cannot write " + p.string());
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

}  // namespace

void Bitext::add(std::vector<std::string> source, std::vector<std::string> target, AlignmentSet links) {
  SentencePair sp{std::move(source), std::move(target), pairs.size()};
  pairs.push_back(std::move(sp));
  alignments.push_back(std::move(links));
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

AlignmentSet parse_alignment_line(std::string_view line, std::size_t src_len, std::size_t tgt_len,
                                  std::size_t line_no) {
  AlignmentSet a;
  std::set<AlignmentLink> seen;
  for (const auto& item : split_tokens(line)) {
    auto dash = item.find('-');
    AlignmentLink link;
    auto bad = [&](const std::string& why) {
      return CorpusError("alignment line " + std::to_string(line_no) + ": " + why + " '" + item + "'");
    };
    if (dash == std::string::npos) throw bad("malformed link");
    const char* b = item.data();
    auto r1 = std::from_chars(b, b + dash, link.src);
    auto r2 = std::from_chars(b + dash + 1, b + item.size(), link.tgt);
    if (r1.ec != std::errc{} || r1.ptr != b + dash || r2.ec != std::errc{} ||
        r2.ptr != b + item.size() || dash == 0) {
      throw bad("malformed link");
    }
    if (link.src >= src_len || link.tgt >= tgt_len) {
      throw bad("link out of range for " + std::to_string(src_len) + "x" + std::to_string(tgt_len) +
                " sentence pair:");
    }
    if (!seen.insert(link).second) throw bad("duplicate link");
    a.links.push_back(link);
  }
  return a;
}

std::string format_alignment(const AlignmentSet& a) {
  std::string s;
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(a.links[i].src) + "-" + std::to_string(a.links[i].tgt);
  }
  return s;
}

Bitext read_bitext(std::istream& src, std::istream& tgt, std::istream& align) {
  auto s = read_lines(src);
  auto t = read_lines(tgt);
  auto a = read_lines(align);
  if (s.size() != t.size() || s.size() != a.size()) {
    std::ostringstream msg;
    msg << "line-count mismatch: source has " << s.size() << " lines, target has " << t.size()
        << " lines, alignment has " << a.size() << " lines";
    auto first_missing = std::min({s.size(), t.size(), a.size()}) + 1;
    msg << " (first unmatched line " << first_missing << ")";
    throw CorpusError(msg.str());
  }
  Bitext b;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto st = split_tokens(s[i]);
    auto tt = split_tokens(t[i]);
    if (st.empty() || tt.empty()) {
      throw CorpusError("line " + std::to_string(i + 1) + ": empty " +
                        (st.empty() ? std::string("source") : std::string("target")) + " sentence");
    }
    auto links = parse_alignment_line(a[i], st.size(), tt.size(), i + 1);
    b.add(std::move(st), std::move(tt), std::move(links));
  }
  return b;
}

Bitext load_bitext(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                   const std::filesystem::path& align_path) {
  auto s = open_input(src_path);
  auto t = open_input(tgt_path);
  auto a = open_input(align_path);
  return read_bitext(s, t, a);
}

void save_bitext(const Bitext& b, const std::filesystem::path& src_path,
                 const std::filesystem::path& tgt_path, const std::filesystem::path& align_path) {
  auto s = open_output(src_path);
  auto t = open_output(tgt_path);
  auto a = open_output(align_path);
  for (std::size_t i = 0; i < b.size(); ++i) {
    s << join(b.pairs[i].source) << '\n';
    t << join(b.pairs[i].target) << '\n';
    a << format_alignment(b.alignments[i]) << '\n';
  }
}

ClassMap read_class_map(std::istream& in, UnknownPolicy policy) {
  ClassMap cm;
  cm.unknown_policy = policy;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw CorpusError("class map line " + std::to_string(line_no) + ": expected token<TAB>class");
    }
    std::string token = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    auto [it, inserted] = cm.mapping.emplace(token, label);
    if (!inserted && it->second != label) {
      throw CorpusError("class map line " + std::to_string(line_no) + ": token '" + token +
                        "' mapped to two classes");
    }
  }
  return cm;
}

ClassMap load_class_map(const std::filesystem::path& path, UnknownPolicy policy) {
  auto in = open_input(path);
  return read_class_map(in, policy);
}

Bitext apply_classes(const Bitext& b, const ClassMap& cm) {
  Bitext out = b;
  std::set<std::string> missing;
  auto map_side = [&](std::vector<std::string>& tokens) {
    for (auto& tok : tokens) {
      if (auto it = cm.mapping.find(tok); it != cm.mapping.end()) {
        tok = it->second;
      } else if (cm.unknown_policy == UnknownPolicy::reserved_label) {
        tok = std::string(kReservedClassLabel);
      } else {
        missing.insert(tok);
      }
    }
  };
  for (auto& sp : out.pairs) {
    map_side(sp.source);
    map_side(sp.target);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw CorpusError("tokens not covered by class map: " + list);
  }
  return out;
}

Bitext filter_by_length(const Bitext& b, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("max_len must be positive");
  Bitext out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& sp = b.pairs[i];
    if (sp.source.size() <= max_len && sp.target.size() <= max_len) {
      out.add(sp.source, sp.target, b.alignments[i]);
    }
  }
  return out;
}

}  // namespace scfg
