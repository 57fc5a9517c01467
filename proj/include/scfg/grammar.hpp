#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scfg/count.hpp"
#include "scfg/merge_plan.hpp"
#include "scfg/vocabulary.hpp"

namespace scfg {

using ProductionId = std::uint32_t;

/// Id of the initial symbol I in every non-empty grammar.
inline constexpr NtId kInitial = 0;

class GrammarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NtKind { initial, plain };

/// The phrase pair (u, v) a specialized non-terminal was created for.
struct PhraseYield {
  std::vector<TokenId> source;
  std::vector<TokenId> target;

  friend bool operator==(const PhraseYield&, const PhraseYield&) = default;
};

struct NonTerminal {
  std::string name;
  NtKind kind = NtKind::plain;
  std::optional<PhraseYield> yield;
  /// C(X): occurrences of the generated phrase pair, summed over merged members.
  Count count;
};

/// Terminal token or a gap slot (1-based). Packed in one int32: negative values are gaps.
class Symbol {
 public:
  static Symbol terminal(TokenId t) { return Symbol(static_cast<std::int32_t>(t)); }
  static Symbol gap(std::uint32_t slot) { return Symbol(-static_cast<std::int32_t>(slot)); }

  bool is_gap() const { return code_ < 0; }
  bool is_terminal() const { return code_ >= 0; }
  TokenId token() const { return static_cast<TokenId>(code_); }
  std::uint32_t slot() const { return static_cast<std::uint32_t>(-code_); }
  std::int32_t code() const { return code_; }

  friend auto operator<=>(const Symbol&, const Symbol&) = default;

 private:
  explicit Symbol(std::int32_t c) : code_(c) {}
  std::int32_t code_;
};

/// X -> (source, target) with coupled gaps. Slot k on either side is filled by
/// fillers[k - 1]. Slots are numbered 1..n in source order once the production
/// is inside an Scfg.
struct Production {
  NtId left = 0;
  std::vector<Symbol> source;
  std::vector<Symbol> target;
  std::vector<NtId> fillers;
  Count count;
  std::optional<double> probability;

  std::size_t arity() const { return fillers.size(); }
  bool has_source_terminal() const;
};

/// Where a non-terminal fills a gap.
struct GapUse {
  ProductionId production;
  std::uint32_t slot;
};

/// Synchronous context-free grammar. Immutable once built; operations return
/// new grammars.
class Scfg {
 public:
  Scfg() = default;

  /// Validates ids and gap coupling, renumbers slots into source order and
  /// builds the left/gap indices. Non-terminal 0 must be the initial symbol.
  Scfg(Vocabulary vocab, std::vector<NonTerminal> nonterminals, std::vector<Production> productions);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<NonTerminal>& nonterminals() const { return nonterminals_; }
  const std::vector<Production>& productions() const { return productions_; }
  const NonTerminal& nonterminal(NtId id) const { return nonterminals_.at(id); }
  const Production& production(ProductionId id) const { return productions_.at(id); }

  std::size_t num_nonterminals() const { return nonterminals_.size(); }
  std::size_t num_productions() const { return productions_.size(); }
  bool empty() const { return nonterminals_.empty(); }
  bool scored() const;

  const std::vector<ProductionId>& by_left(NtId x) const { return by_left_.at(x); }
  const std::vector<GapUse>& by_gap(NtId x) const { return by_gap_.at(x); }

  std::optional<NtId> find(std::string_view name) const;

  /// "das [X5,1] Haus"
  std::string render_side(const Production& p, bool source) const;
  std::string render(const Production& p) const;

 private:
  Vocabulary vocab_;
  std::vector<NonTerminal> nonterminals_;
  std::vector<Production> productions_;
  std::vector<std::vector<ProductionId>> by_left_;
  std::vector<std::vector<GapUse>> by_gap_;
  std::map<std::string, NtId, std::less<>> by_name_;
};

/// Attaches p(r) = c(r) / C(left(r)). For I, C(I) is the summed glue count.
Scfg estimate_probabilities(const Scfg& g);

struct GrammarStats {
  std::size_t nonterminals = 0;
  std::size_t productions = 0;
  std::size_t glue_productions = 0;
  Count count_mass;  // sum of c(r) over plain left-hand sides
  std::map<std::size_t, std::size_t> arity_histogram;
};

GrammarStats grammar_stats(const Scfg& g);

/// `key=value` lines: nonterminals, productions, glue_productions, count_mass, arity<k>.
std::string format_stats(const GrammarStats& s);

/// Collapses each class of `plan` onto its representative. Productions that
/// become identical are merged with summed counts; C of a class is the sum of
/// its members. Representatives keep their names.
Scfg apply_merge_plan(const Scfg& g, const MergePlan& plan);

/// Σ c(r) over productions with plain left-hand sides.
Count total_count_mass(const Scfg& g);

/// Throws GrammarError unless Σ_{left(r)=X} c(r) = C(X) for every plain X.
void check_normalization(const Scfg& g);

}  // namespace scfg
