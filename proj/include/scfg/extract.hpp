#pragma once

#include <string>
#include <vector>

#include "scfg/corpus.hpp"
#include "scfg/grammar.hpp"
#include "scfg/phrases.hpp"

namespace scfg {

struct ExtractOptions {
  /// Gaps per production. One gap reproduces the published two-sentence table;
  /// larger values iterate substitution to a fixed point.
  std::size_t max_gaps = 1;
  bool forbid_adjacent_gaps = false;
  /// Sentence pairs without links contribute their full pair only.
  bool allow_empty_alignment = false;
  std::size_t threads = 1;
};

/// One non-terminal per distinct phrase pair; lexical rules, gapped rules from
/// every contained phrase-pair occurrence, a glue rule I -> (X_n, X_n) per
/// sentence, and counts distributed equally among each left-hand side's rules.
///
/// Non-terminals are numbered in discovery order: sentence by sentence, spans by
/// decreasing source length, then source start, then decreasing target length
/// and target start. Warnings for skipped sentence pairs go to `warnings`.
Scfg extract_specialized(const Bitext& b, const ExtractOptions& opt = {},
                         std::vector<std::string>* warnings = nullptr);

/// C(X) = inventory count of X's phrase pair; each production of X gets C(X)/n.
/// Glue counts are left as they are and C(I) becomes their sum.
Scfg distribute_counts(const Scfg& g, const PhraseInventory& inventory);

struct BaselineLimits {
  std::size_t max_phrase_len = 10;
  std::size_t max_gaps = 2;
  std::size_t max_src_symbols = 5;
};

/// True if a single-X production meets the hierarchical restrictions: bounded
/// gaps and source symbols, lexical content, no adjacent source gaps.
bool satisfies_baseline_limits(const Production& p, const BaselineLimits& limits);

/// Hierarchical grammar with one productive non-terminal X plus the glue rules
/// I -> (X, X) and I -> (I X, I X). Each phrase-pair occurrence spreads a unit
/// count equally over the rules it yields.
Scfg extract_chiang_baseline(const Bitext& b, const BaselineLimits& limits = {});

}  // namespace scfg
