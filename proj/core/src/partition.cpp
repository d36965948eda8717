#include "amrckpt/partition.hpp"

#include <algorithm>
#include <string>

#include "amrckpt/errors.hpp"

namespace amrckpt {

std::vector<std::int64_t> even_ranges(std::int64_t count, int nranks) {
  if (nranks < 1) throw ConfigError("rank count must be >= 1, got " + std::to_string(nranks));
  if (count < 0) throw PreconditionError("negative item count");
  std::vector<std::int64_t> first(static_cast<std::size_t>(nranks) + 1, 0);
  const std::int64_t base = count / nranks;
  const std::int64_t extra = count % nranks;
  for (int r = 0; r < nranks; ++r) {
    first[static_cast<std::size_t>(r) + 1] = first[static_cast<std::size_t>(r)] + base + (r < extra ? 1 : 0);
  }
  return first;
}

int RankAssignment::rank_of_index(std::int64_t leaf) const {
  if (leaf < 0 || leaf >= first.back()) throw PreconditionError("leaf index out of range");
  const auto it = std::upper_bound(first.begin(), first.end(), leaf);
  return static_cast<int>(it - first.begin()) - 1;
}

int RankAssignment::rank_of(const BlockKey& key) const {
  const auto it = std::lower_bound(leaves.begin(), leaves.end(), key, canonical_less);
  if (it == leaves.end() || *it != key) throw PreconditionError("block is not a leaf of this partition");
  return rank_of_index(it - leaves.begin());
}

RankAssignment partition_leaves(const MeshAccess& mesh, int nranks) {
  RankAssignment ra;
  ra.nranks = nranks;
  ra.leaves = leaf_keys(mesh);
  if (nranks > static_cast<int>(ra.leaves.size())) {
    throw ConfigError(std::to_string(nranks) + " ranks exceed the " + std::to_string(ra.leaves.size()) + " leaf blocks");
  }
  ra.first = even_ranges(static_cast<std::int64_t>(ra.leaves.size()), nranks);
  return ra;
}

}  // namespace amrckpt
