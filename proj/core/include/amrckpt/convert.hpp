#pragma once

#include "amrckpt/level_mesh.hpp"
#include "amrckpt/octree_mesh.hpp"

namespace amrckpt {

/// Groups all blocks of each level into boxes by greedy row-major merging
/// (extend along x, then grow along y). Cell data is copied, not interpolated.
/// Throws InvariantError if `mesh` is not 2:1 balanced.
LevelMesh octree_to_level(const OctreeMesh& mesh);

/// Decomposes boxes into blocks, rebuilds ancestry and node types, regenerates
/// non-leaf data by restriction. Throws AlignmentError / StructureError for
/// malformed hierarchies and StructureError when the result is unbalanced.
OctreeMesh level_to_octree(const LevelMesh& mesh);

/// Either representation from a leaf map; parents restricted, guards filled.
std::unique_ptr<MeshAccess> mesh_from_leaves(const Domain& domain, std::map<BlockKey, PatchData> leaves,
                                             Representation rep);

/// Same hierarchy in the other (or same) representation, guards filled.
std::unique_ptr<MeshAccess> convert_mesh(const MeshAccess& mesh, Representation target);

}  // namespace amrckpt
