#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scfg/corpus.hpp"
#include "scfg/grammar.hpp"
#include "scfg/phrases.hpp"

namespace scfg {

/// A production application covering a synchronized span pair; children are
/// ordered by gap slot.
struct DerivationTree {
  ProductionId production = 0;
  Span source;
  Span target;
  std::vector<DerivationTree> children;
};

struct VerifyOptions {
  /// Upper bound on (source spans x target spans) per sentence pair. The chart
  /// is O(n^2 m^2) cells, so long pairs abort instead of running unbounded.
  std::size_t max_span_pairs = 4'000'000;
};

class VerifyBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bottom-up synchronous recognizer over (source span, target span) cells.
/// Productions are pre-filtered per sentence by their terminal signature.
class Recognizer {
 public:
  explicit Recognizer(const Scfg& g, VerifyOptions opt = {});

  /// A derivation rooted at I whose yield is exactly (source, target).
  std::optional<DerivationTree> derive(const SentencePair& sp) const;

 private:
  const Scfg& g_;
  VerifyOptions opt_;
  std::vector<std::vector<TokenId>> src_terms_;  // distinct source terminals per production
  std::vector<std::vector<TokenId>> tgt_terms_;
  std::vector<std::vector<ProductionId>> by_src_token_;
  std::vector<ProductionId> no_src_terminal_;
};

std::optional<DerivationTree> derives(const Scfg& g, const SentencePair& sp, const VerifyOptions& opt = {});

struct CoverageReport {
  std::size_t total = 0;
  std::size_t derived = 0;
  std::vector<std::size_t> failing_ids;

  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(derived) / static_cast<double>(total); }
};

CoverageReport coverage_report(const Scfg& g, const Bitext& b, std::size_t threads = 1,
                               const VerifyOptions& opt = {});

/// (X1 [das [X3,1] ||| the [X3,1]] (X3 [...] ...))
std::string format_tree(const Scfg& g, const DerivationTree& t);

}  // namespace scfg
