#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace scfg {

using NtId = std::uint32_t;

/// Partition of a grammar's non-terminals, kept as a union-find forest. Every
/// class has an explicit representative that stays a member of the class. The
/// initial symbol (id 0) is always a singleton.
class MergePlan {
 public:
  MergePlan() = default;
  explicit MergePlan(std::size_t num_nonterminals);

  std::size_t size() const { return parent_.size(); }

  /// Representative of the class containing `x`.
  NtId find(NtId x) const;
  bool same_class(NtId a, NtId b) const { return find(a) == find(b); }

  /// Joins the classes of `keep` and `absorb`; the class of `keep` supplies the
  /// representative. Returns false if they were already together.
  bool unite(NtId keep, NtId absorb);

  bool is_identity() const;
  std::size_t num_classes() const;

  /// Members grouped by representative, classes ordered by representative id,
  /// members ascending.
  std::vector<std::vector<NtId>> classes() const;

 private:
  NtId root(NtId x) const;

  mutable std::vector<NtId> parent_;
  std::vector<std::uint32_t> rank_;
  std::vector<NtId> rep_;  // valid at roots
};

}  // namespace scfg
