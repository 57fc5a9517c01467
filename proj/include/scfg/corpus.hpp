#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scfg {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One line of the bitext. Tokens never contain whitespace.
struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::size_t id = 0;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

/// Zero-based (source position, target position) link.
struct AlignmentLink {
  std::uint32_t src = 0;
  std::uint32_t tgt = 0;

  friend auto operator<=>(const AlignmentLink&, const AlignmentLink&) = default;
};

/// Links in input order; duplicates are rejected on load.
struct AlignmentSet {
  std::vector<AlignmentLink> links;

  friend bool operator==(const AlignmentSet&, const AlignmentSet&) = default;
};

struct Bitext {
  std::vector<SentencePair> pairs;
  std::vector<AlignmentSet> alignments;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  void add(std::vector<std::string> source, std::vector<std::string> target, AlignmentSet links);
};

enum class UnknownPolicy { reject, reserved_label };

/// Label substituted for uncovered tokens under UnknownPolicy::reserved_label.
inline constexpr std::string_view kReservedClassLabel = "UNK0";

struct ClassMap {
  std::unordered_map<std::string, std::string> mapping;
  UnknownPolicy unknown_policy = UnknownPolicy::reject;
};

std::vector<std::string> split_tokens(std::string_view line);

/// Parses a Pharaoh line ("0-0 1-2"). `line_no` is 1-based and only used in messages.
AlignmentSet parse_alignment_line(std::string_view line, std::size_t src_len, std::size_t tgt_len,
                                  std::size_t line_no);

std::string format_alignment(const AlignmentSet& a);

/// Reads parallel source, target and alignment streams, one sentence per line.
Bitext read_bitext(std::istream& src, std::istream& tgt, std::istream& align);

Bitext load_bitext(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                   const std::filesystem::path& align_path);

void save_bitext(const Bitext& b, const std::filesystem::path& src_path,
                 const std::filesystem::path& tgt_path, const std::filesystem::path& align_path);

/// `token<TAB>class` per line.
ClassMap read_class_map(std::istream& in, UnknownPolicy policy = UnknownPolicy::reject);
ClassMap load_class_map(const std::filesystem::path& path,
                        UnknownPolicy policy = UnknownPolicy::reject);

/// Replaces every token on both sides by its class label. Alignments are untouched.
Bitext apply_classes(const Bitext& b, const ClassMap& cm);

/// Keeps pairs whose source and target both have at most `max_len` tokens, re-indexing ids.
Bitext filter_by_length(const Bitext& b, std::size_t max_len);

}  // namespace scfg
