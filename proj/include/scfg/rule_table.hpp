#pragma once

#include <filesystem>
#include <iosfwd>

#include "scfg/grammar.hpp"

namespace scfg {

/// One line per production, sorted by (left id, source side, target side):
///
///   X1 ||| das [X5,1] Haus ||| the [X5,1] house ||| count=0.1666666667 prob=0.1666666667 ||| exact=1/6
///
/// The trailing exact field keeps the rational count so the table parses back
/// without loss. Requires a scored grammar.
void export_rule_table(const Scfg& g, std::ostream& out);
void export_rule_table(const Scfg& g, const std::filesystem::path& path);

/// Inverse of export_rule_table. Non-terminal counts are recovered as the sum
/// of their production counts; yields are not part of the table.
Scfg parse_rule_table(std::istream& in);
Scfg parse_rule_table(const std::filesystem::path& path);

/// Full-fidelity text dump (non-terminals with yields and counts, productions
/// in order, probabilities once scored) used to pass grammars between stages.
void write_grammar_dump(const Scfg& g, std::ostream& out);
void write_grammar_dump(const Scfg& g, const std::filesystem::path& path);
Scfg read_grammar_dump(std::istream& in);
Scfg read_grammar_dump(const std::filesystem::path& path);

}  // namespace scfg
