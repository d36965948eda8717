#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "amrckpt/geometry.hpp"
#include "amrckpt/patch.hpp"

namespace amrckpt {

/// Interior cell of some patch.
struct CellRef {
  const PatchData* patch = nullptr;
  int i = 0;
  int j = 0;
};

/// A leaf block as seen through either representation. The block's 8x8
/// interior sits at [offx, offx+8) x [offy, offy+8) of `patch`, and the
/// surrounding ring of patch cells supplies its guard values.
struct LeafRef {
  BlockKey key;
  const PatchData* patch = nullptr;
  int offx = 0;
  int offy = 0;

  double value(int var, int li, int lj) const { return patch->at(var, offx + li, offy + lj); }
};

/// Unit of work for the hydro update. `covered` (optional) flags, per 8x8
/// block of the patch in row-major block order, cells overlaid by a finer level;
/// those cells are not advanced and are overwritten by restriction.
struct SolverPatch {
  int level = 0;
  std::int64_t ilo = 0;
  std::int64_t jlo = 0;
  PatchData* data = nullptr;
  const std::vector<std::uint8_t>* covered = nullptr;

  bool is_covered(int i, int j) const {
    if (covered == nullptr) return false;
    const int nbx = data->nx() / kNxb;
    return (*covered)[static_cast<std::size_t>((j / kNyb) * nbx + i / kNxb)] != 0;
  }
};

/// Refinement criteria shared by both representations.
struct RefineConfig {
  double refine_thresh = 0.8;
  double derefine_thresh = 0.2;
  /// Noise filter of the second-derivative estimator.
  double filter = 0.01;
  std::vector<Var> vars{Var::Dens, Var::Pres};
  /// Level representation only: tag dilation radius in cells.
  int buffer_cells = 2;

  void validate() const;
};

/// Applied to the interior of every leaf block whose data was produced by
/// prolongation or restriction during a regrid.
using LeafFixup = std::function<void(PatchData&)>;

/// Representation-neutral view over an AMR hierarchy. The hydro solver,
/// particle code, and checkpoint extraction only talk to this interface.
class MeshAccess {
 public:
  virtual ~MeshAccess() = default;

  virtual Representation rep() const = 0;
  virtual const Domain& domain() const = 0;
  virtual std::unique_ptr<MeshAccess> clone() const = 0;

  /// True when a block exists at that key, leaf or not.
  virtual bool has_block(const BlockKey& key) const = 0;
  virtual bool is_leaf(const BlockKey& key) const = 0;
  /// Interior cell of the block at `level` covering global cell (i, j), if any.
  virtual std::optional<CellRef> locate(int level, std::int64_t i, std::int64_t j) const = 0;

  /// Leaf blocks in canonical order (levels ascending, Morton within level).
  virtual std::vector<LeafRef> leaves() const = 0;
  virtual std::vector<SolverPatch> solver_patches() = 0;

  virtual void fill_guards() = 0;
  virtual void restrict_to_parents() = 0;
  virtual bool guards_filled() const = 0;
  /// Call after writing cell data through solver_patches().
  virtual void mark_modified() = 0;

  /// Applies this representation's refinement strategy.
  virtual void regrid(const RefineConfig& cfg, const LeafFixup& fixup) = 0;
};

/// Keys of all leaves in canonical order.
std::vector<BlockKey> leaf_keys(const MeshAccess& mesh);

/// Highest level holding at least one leaf.
int finest_leaf_level(const MeshAccess& mesh);

}  // namespace amrckpt
