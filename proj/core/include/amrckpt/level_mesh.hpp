#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "amrckpt/mesh.hpp"

namespace amrckpt {

/// Rectangular cell range in one level's global index space, with its data.
struct Box {
  std::int64_t ilo = 0;
  std::int64_t jlo = 0;
  int nx = 0;
  int ny = 0;
  PatchData data;

  Box() = default;
  Box(std::int64_t ilo_, std::int64_t jlo_, int nx_, int ny_)
      : ilo(ilo_), jlo(jlo_), nx(nx_), ny(ny_), data(nx_, ny_) {}

  std::int64_t num_cells() const { return static_cast<std::int64_t>(nx) * ny; }
};

/// Level/box hierarchy. Level L holds every cell of level L, including those
/// overlaid by level L+1 (which carry restricted data).
class LevelMesh final : public MeshAccess {
 public:
  /// Validates block alignment (AlignmentError), disjointness, domain bounds
  /// and proper nesting (StructureError).
  LevelMesh(const Domain& domain, std::vector<std::vector<Box>> levels);

  Representation rep() const override { return Representation::Level; }
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
  /// Cell tagging with a dilation buffer, rebuilt from scratch each call:
  /// a block keeps (or gains) children only while some cell within
  /// buffer_cells of it is tagged above refine_thresh.
  void regrid(const RefineConfig& cfg, const LeafFixup& fixup) override;

  std::size_t num_levels() const { return levels_.size(); }
  const std::vector<Box>& level(std::size_t l) const { return levels_.at(l); }
  std::int64_t num_cells(std::size_t l) const;

 private:
  struct Loc {
    int level = 0;
    int box = 0;
    int offx = 0;
    int offy = 0;
  };

  void build_index();

  Domain domain_;
  std::vector<std::vector<Box>> levels_;
  std::vector<std::vector<std::vector<std::uint8_t>>> covered_;
  std::unordered_map<BlockKey, Loc, BlockKeyHash> index_;
  bool guards_filled_ = false;
};

}  // namespace amrckpt
