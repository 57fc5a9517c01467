#include "scfg/merge_plan.hpp"

#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scfg {

MergePlan::MergePlan(std::size_t n) : parent_(n), rank_(n, 0), rep_(n) {
  std::iota(parent_.begin(), parent_.end(), NtId{0});
  std::iota(rep_.begin(), rep_.end(), NtId{0});
}

NtId MergePlan::root(NtId x) const {
  if (x >= parent_.size()) throw std::out_of_range("non-terminal id " + std::to_string(x) + " not in plan");
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

NtId MergePlan::find(NtId x) const { return rep_[root(x)]; }

bool MergePlan::unite(NtId keep, NtId absorb) {
  if (keep == 0 || absorb == 0) throw std::invalid_argument("the initial symbol cannot be merged");
  NtId a = root(keep), b = root(absorb);
  if (a == b) return false;
  NtId rep = rep_[a];
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  rep_[a] = rep;
  return true;
}

bool MergePlan::is_identity() const { return num_classes() == size(); }

std::size_t MergePlan::num_classes() const {
  std::size_t n = 0;
  for (NtId x = 0; x < parent_.size(); ++x) n += root(x) == x;
  return n;
}

std::vector<std::vector<NtId>> MergePlan::classes() const {
  std::map<NtId, std::vector<NtId>> by_rep;
  for (NtId x = 0; x < parent_.size(); ++x) by_rep[find(x)].push_back(x);
  std::vector<std::vector<NtId>> out;
  out.reserve(by_rep.size());
  for (auto& [rep, members] : by_rep) out.push_back(std::move(members));
  return out;
}

}  // namespace scfg
