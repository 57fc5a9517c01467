#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "scfg/corpus.hpp"
#include "scfg/grammar.hpp"
#include "scfg/phrases.hpp"

namespace scfg::testing {

/// ("das neue Haus", "the new house") and ("das Haus", "the house"), monotone links.
Bitext house_bitext();

/// Productions expected from house_bitext, rendered as
/// "X1 ||| das [X5,1] Haus ||| the [X5,1] house ||| 1/6".
std::vector<std::string> house_productions();

/// Renders every production of `g` in the house_productions format.
std::vector<std::string> render_productions(const Scfg& g);

/// Random pair with 1..max_len tokens per side drawn from a small vocabulary
/// and random links (possibly none, possibly many-to-many).
std::pair<SentencePair, AlignmentSet> random_pair(std::mt19937& rng, std::size_t max_len);

/// Toy transfer language: noun phrases (det [adj] noun) with the adjective
/// moved behind the noun on the target side, combined as NP, NP V or NP V NP.
/// Every word is aligned one-to-one.
Bitext synthetic_bitext(std::size_t pairs, std::uint32_t seed);

/// Small random bitext whose specialized grammar stays small.
Bitext random_bitext(std::mt19937& rng, std::size_t pairs, std::size_t max_len);

/// Span pairs by direct enumeration of every candidate box.
std::set<SpanPair> brute_force_span_pairs(const SentencePair& sp, const AlignmentSet& a);

/// Two-sided Fisher p-value < alpha by enumerating every table with the
/// margins of [a b; c d] in exact rational arithmetic.
bool fisher_oracle(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d, double alpha);

/// Every (source, target) pair the grammar derives from I with at most
/// `max_len` tokens per side, by fixpoint iteration over bounded yields.
std::set<std::pair<std::vector<TokenId>, std::vector<TokenId>>> bounded_language(const Scfg& g,
                                                                                 std::size_t max_len);

/// Minimum of the k-medoids objective over all k-subsets.
double brute_force_kmedoids(const std::vector<std::vector<double>>& dist, std::size_t k);

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

}  // namespace scfg::testing
