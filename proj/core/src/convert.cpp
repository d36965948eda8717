#include "amrckpt/convert.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "amrckpt/errors.hpp"

namespace amrckpt {

LevelMesh octree_to_level(const OctreeMesh& mesh) {
  const Domain& d = mesh.domain();
  if (!is_balanced(mesh.leaf_set(), d)) throw InvariantError("octree_to_level requires a 2:1 balanced mesh");

  int top = 0;
  for (const Block& b : mesh.blocks()) top = std::max(top, b.key.level);
  std::vector<std::vector<Box>> levels(static_cast<std::size_t>(top) + 1);

  for (int l = 0; l <= top; ++l) {
    std::set<std::pair<std::int64_t, std::int64_t>> free;  // (iy, ix)
    for (const Block& b : mesh.blocks()) {
      if (b.key.level == l) free.emplace(b.key.iy, b.key.ix);
    }
    while (!free.empty()) {
      const auto [iy, ix] = *free.begin();
      std::int64_t w = 1;
      while (free.count({iy, ix + w}) != 0) ++w;
      std::int64_t h = 1;
      while (true) {
        bool row = true;
        for (std::int64_t x = ix; x < ix + w && row; ++x) row = free.count({iy + h, x}) != 0;
        if (!row) break;
        ++h;
      }
      Box box(ix * kNxb, iy * kNyb, static_cast<int>(w * kNxb), static_cast<int>(h * kNyb));
      for (std::int64_t y = iy; y < iy + h; ++y) {
        for (std::int64_t x = ix; x < ix + w; ++x) {
          free.erase({y, x});
          const PatchData& src = mesh.blocks()[static_cast<std::size_t>(mesh.find(BlockKey{l, x, y}))].data;
          const int ox = static_cast<int>((x - ix) * kNxb);
          const int oy = static_cast<int>((y - iy) * kNyb);
          for (int v = 0; v < kNumVars; ++v) {
            for (int j = 0; j < kNyb; ++j) {
              for (int i = 0; i < kNxb; ++i) box.data.at(v, ox + i, oy + j) = src.at(v, i, j);
            }
          }
        }
      }
      levels[static_cast<std::size_t>(l)].push_back(std::move(box));
    }
  }
  return LevelMesh(d, std::move(levels));
}

OctreeMesh level_to_octree(const LevelMesh& mesh) {
  std::map<BlockKey, PatchData> leaves;
  for (const LeafRef& leaf : mesh.leaves()) {
    PatchData pd(kNxb, kNyb);
    for (int v = 0; v < kNumVars; ++v) {
      for (int j = 0; j < kNyb; ++j) {
        for (int i = 0; i < kNxb; ++i) pd.at(v, i, j) = leaf.value(v, i, j);
      }
    }
    leaves.emplace(leaf.key, std::move(pd));
  }
  OctreeMesh out = OctreeMesh::from_leaves(mesh.domain(), std::move(leaves));
  if (!is_balanced(out.leaf_set(), out.domain())) throw StructureError("level mesh is not 2:1 balanced");
  return out;
}

std::unique_ptr<MeshAccess> mesh_from_leaves(const Domain& domain, std::map<BlockKey, PatchData> leaves,
                                             Representation rep) {
  OctreeMesh tree = OctreeMesh::from_leaves(domain, std::move(leaves));
  std::unique_ptr<MeshAccess> out;
  if (rep == Representation::Octree) {
    out = std::make_unique<OctreeMesh>(std::move(tree));
  } else {
    out = std::make_unique<LevelMesh>(octree_to_level(tree));
  }
  out->fill_guards();
  return out;
}

std::unique_ptr<MeshAccess> convert_mesh(const MeshAccess& mesh, Representation target) {
  std::unique_ptr<MeshAccess> out;
  if (mesh.rep() == target) {
    out = mesh.clone();
  } else if (mesh.rep() == Representation::Octree) {
    out = std::make_unique<LevelMesh>(octree_to_level(static_cast<const OctreeMesh&>(mesh)));
  } else {
    out = std::make_unique<OctreeMesh>(level_to_octree(static_cast<const LevelMesh&>(mesh)));
  }
  out->fill_guards();
  return out;
}

}  // namespace amrckpt
