#pragma once

#include <cstdint>
#include <vector>

#include "amrckpt/mesh.hpp"

namespace amrckpt {

/// Contiguous ranges of leaves (canonical order) assigned to virtual ranks.
/// Range sizes differ by at most one; earlier ranks take the extra leaves.
struct RankAssignment {
  int nranks = 1;
  std::vector<BlockKey> leaves;
  /// leaves[first[r], first[r+1]) belong to rank r; size nranks + 1.
  std::vector<std::int64_t> first;

  std::int64_t count(int rank) const { return first.at(static_cast<std::size_t>(rank) + 1) - first.at(static_cast<std::size_t>(rank)); }
  /// Rank owning leaf index `leaf` (canonical position).
  int rank_of_index(std::int64_t leaf) const;
  /// Rank owning the leaf with that key; throws PreconditionError if absent.
  int rank_of(const BlockKey& key) const;
};

/// Even split of `count` items into `nranks` contiguous ranges, as boundaries.
std::vector<std::int64_t> even_ranges(std::int64_t count, int nranks);

/// Throws ConfigError when nranks < 1 or nranks exceeds the leaf count.
RankAssignment partition_leaves(const MeshAccess& mesh, int nranks);

}  // namespace amrckpt
