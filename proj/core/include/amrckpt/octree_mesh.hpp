#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "amrckpt/mesh.hpp"

namespace amrckpt {

enum class NodeType : int { Leaf = 1, Parent = 2, Ancestor = 3 };

struct Block {
  BlockKey key;
  BoundingBox bnd_box;
  std::array<double, 2> coord{};
  NodeType nodetype = NodeType::Leaf;
  int parent = -1;
  std::array<int, 4> children{-1, -1, -1, -1};
  std::uint64_t morton = 0;
  PatchData data{kNxb, kNyb};

  int level() const { return key.level; }
  bool is_leaf() const { return nodetype == NodeType::Leaf; }
};

using LeafSet = std::set<BlockKey>;

/// Quadtree of fixed-size blocks. Blocks are stored levels ascending, Morton
/// order within a level; parents hold the restriction of their children.
class OctreeMesh final : public MeshAccess {
 public:
  /// Builds the tree whose leaves are exactly `leaves`, synthesizing every
  /// ancestor. Throws StructureError if the leaves overlap, leave a sibling
  /// quartet incomplete, or fail to cover the level-0 grid. Parent data is
  /// filled by restriction; guards are left stale.
  static OctreeMesh from_leaves(const Domain& domain, std::map<BlockKey, PatchData> leaves);

  Representation rep() const override { return Representation::Octree; }
  const Domain& domain() const override { return domain_; }
  std::unique_ptr<MeshAccess> clone() const override;

  bool has_block(const BlockKey& key) const override { return index_.count(key) != 0; }
  bool is_leaf(const BlockKey& key) const override;
  std::optional<CellRef> locate(int level, std::int64_t i, std::int64_t j) const override;
  std::vector<LeafRef> leaves() const override;
  std::vector<SolverPatch> solver_patches() override;

  void fill_guards() override;
  void restrict_to_parents() override;
  bool guards_filled() const override { return guards_filled_; }
  void mark_modified() override { guards_filled_ = false; }
  void regrid(const RefineConfig& cfg, const LeafFixup& fixup) override;

  const std::vector<Block>& blocks() const { return blocks_; }
  /// Mutable block access; invalidates guards.
  Block& block_mut(int index);
  /// Index of the block with that key, or -1.
  int find(const BlockKey& key) const;
  std::size_t num_leaves() const;
  LeafSet leaf_set() const;

 private:
  OctreeMesh() = default;
  void rebuild_index();

  Domain domain_;
  std::vector<Block> blocks_;
  std::unordered_map<BlockKey, int, BlockKeyHash> index_;
  bool guards_filled_ = false;
};

/// base_nx x base_ny level-0 leaves tiling the domain, zero data.
OctreeMesh make_initial_mesh(const Domain& domain);

/// Per-leaf indicator (canonical leaf order): max over the block's interior
/// cells of the Lohner estimator of `var`. Requires filled guards.
std::vector<double> error_indicator(const OctreeMesh& mesh, Var var, double filter = 0.01);

/// Max of error_indicator over the configured variables.
std::vector<double> combined_indicator(const OctreeMesh& mesh, const RefineConfig& cfg);

/// One refine/derefine pass. Requires filled guards and restricted parents.
/// Leaves above refine_thresh split (data prolonged); sibling quartets all
/// below derefine_thresh merge (data restricted) unless the merged block would
/// itself exceed refine_thresh or break balance; forced refinement restores
/// 2:1 balance. Returns the input unchanged when no leaf moves.
OctreeMesh refine_step(const OctreeMesh& mesh, const RefineConfig& cfg, const LeafFixup& fixup = {});

/// Fills guards of every block from neighbours (copy, prolongation,
/// restriction) and the domain boundary (zero gradient).
void guard_fill(OctreeMesh& mesh);

/// Overwrites every non-leaf cell with the mean of its 4 child cells,
/// finest level first.
void restrict_to_parents(OctreeMesh& mesh);

// Leaf-set utilities shared by both refinement strategies.

/// Leaf whose region contains `key` (key itself or an ancestor), if any.
std::optional<BlockKey> covering_leaf(const LeafSet& leaves, const BlockKey& key);
/// True when every leaf's edge and corner neighbours differ by at most one level.
bool is_balanced(const LeafSet& leaves, const Domain& domain);
/// Splits coarse leaves until is_balanced holds.
void balance(LeafSet& leaves, const Domain& domain);
/// Tree with leaf set `leaves`; data for each leaf is copied from `old` when
/// the block already existed there, restricted from its old children when it
/// was an old parent, and prolonged otherwise. Interpolated leaves get `fixup`.
OctreeMesh rebuild_with_leaves(const OctreeMesh& old, const LeafSet& leaves, const LeafFixup& fixup);

}  // namespace amrckpt
