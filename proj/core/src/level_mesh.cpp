#include "amrckpt/level_mesh.hpp"

#include <algorithm>
#include <string>

#include "amrckpt/convert.hpp"
#include "amrckpt/errors.hpp"
#include "amrckpt/interp.hpp"

namespace amrckpt {

namespace {

std::string box_str(std::size_t level, const Box& b) {
  return "level " + std::to_string(level) + " box (" + std::to_string(b.ilo) + ", " + std::to_string(b.jlo) + ", " +
         std::to_string(b.nx) + "x" + std::to_string(b.ny) + ")";
}

}  // namespace

LevelMesh::LevelMesh(const Domain& domain, std::vector<std::vector<Box>> levels)
    : domain_(domain), levels_(std::move(levels)) {
  domain_.validate();
  if (levels_.empty() || levels_[0].empty()) throw StructureError("level mesh has no level-0 boxes");
  if (levels_.size() > static_cast<std::size_t>(domain_.max_level) + 1) {
    throw StructureError("level mesh has more levels than max_level allows");
  }
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const int lev = static_cast<int>(l);
    for (const Box& b : levels_[l]) {
      if (b.nx <= 0 || b.ny <= 0 || b.ilo % kNxb != 0 || b.jlo % kNyb != 0 || b.nx % kNxb != 0 ||
          b.ny % kNyb != 0) {
        throw AlignmentError(box_str(l, b) + " is not aligned to 8-cell blocks");
      }
      if (b.data.nx() != b.nx || b.data.ny() != b.ny || b.data.nvar() != kNumVars) {
        throw StructureError(box_str(l, b) + " data has the wrong shape");
      }
      if (b.ilo < 0 || b.jlo < 0 || b.ilo + b.nx > domain_.ncells_x(lev) || b.jlo + b.ny > domain_.ncells_y(lev)) {
        throw StructureError(box_str(l, b) + " extends outside the domain");
      }
    }
  }
  build_index();

  for (std::int64_t iy = 0; iy < domain_.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < domain_.base_nx; ++ix) {
      if (!has_block(BlockKey{0, ix, iy})) throw StructureError("level 0 does not cover the domain");
    }
  }
  for (const auto& [key, loc] : index_) {
    if (key.level == 0) continue;
    if (!has_block(key.parent())) {
      throw StructureError("level " + std::to_string(key.level) + " block (" + std::to_string(key.ix) + ", " +
                           std::to_string(key.iy) + ") is not properly nested");
    }
    for (int q = 0; q < 4; ++q) {
      if (!has_block(key.parent().child(q))) {
        throw StructureError("level " + std::to_string(key.level) + " does not cover whole parent blocks near (" +
                             std::to_string(key.ix) + ", " + std::to_string(key.iy) + ")");
      }
    }
  }

  covered_.assign(levels_.size(), {});
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (const Box& b : levels_[l]) {
      const int nbx = b.nx / kNxb;
      const int nby = b.ny / kNyb;
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(nbx * nby), 0);
      for (int by = 0; by < nby; ++by) {
        for (int bx = 0; bx < nbx; ++bx) {
          const BlockKey k{static_cast<int>(l), b.ilo / kNxb + bx, b.jlo / kNyb + by};
          mask[static_cast<std::size_t>(by * nbx + bx)] = has_block(k.child(0)) ? 1 : 0;
        }
      }
      covered_[l].push_back(std::move(mask));
    }
  }
}

void LevelMesh::build_index() {
  index_.clear();
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (std::size_t bi = 0; bi < levels_[l].size(); ++bi) {
      const Box& b = levels_[l][bi];
      for (int by = 0; by < b.ny / kNyb; ++by) {
        for (int bx = 0; bx < b.nx / kNxb; ++bx) {
          const BlockKey k{static_cast<int>(l), b.ilo / kNxb + bx, b.jlo / kNyb + by};
          const Loc loc{static_cast<int>(l), static_cast<int>(bi), bx * kNxb, by * kNyb};
          if (!index_.emplace(k, loc).second) throw StructureError(box_str(l, b) + " overlaps another box");
        }
      }
    }
  }
}

std::unique_ptr<MeshAccess> LevelMesh::clone() const { return std::make_unique<LevelMesh>(*this); }

bool LevelMesh::is_leaf(const BlockKey& key) const { return has_block(key) && !has_block(key.child(0)); }

std::optional<CellRef> LevelMesh::locate(int level, std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0) return std::nullopt;
  const auto it = index_.find(BlockKey{level, i / kNxb, j / kNyb});
  if (it == index_.end()) return std::nullopt;
  const Loc& loc = it->second;
  const Box& b = levels_[static_cast<std::size_t>(loc.level)][static_cast<std::size_t>(loc.box)];
  return CellRef{&b.data, loc.offx + static_cast<int>(i % kNxb), loc.offy + static_cast<int>(j % kNyb)};
}

std::vector<LeafRef> LevelMesh::leaves() const {
  std::vector<LeafRef> out;
  for (const auto& [key, loc] : index_) {
    if (has_block(key.child(0))) continue;
    const Box& b = levels_[static_cast<std::size_t>(loc.level)][static_cast<std::size_t>(loc.box)];
    out.push_back(LeafRef{key, &b.data, loc.offx, loc.offy});
  }
  std::sort(out.begin(), out.end(), [](const LeafRef& a, const LeafRef& b) { return canonical_less(a.key, b.key); });
  return out;
}

std::vector<SolverPatch> LevelMesh::solver_patches() {
  std::vector<SolverPatch> out;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (std::size_t bi = 0; bi < levels_[l].size(); ++bi) {
      Box& b = levels_[l][bi];
      out.push_back(SolverPatch{static_cast<int>(l), b.ilo, b.jlo, &b.data, &covered_[l][bi]});
    }
  }
  return out;
}

void LevelMesh::fill_guards() {
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    for (Box& b : levels_[l]) fill_patch_guards(*this, b.data, static_cast<int>(l), b.ilo, b.jlo);
  }
  guards_filled_ = true;
}

void LevelMesh::restrict_to_parents() {
  for (std::size_t l = levels_.size(); l-- > 1;) {
    for (std::size_t bi = 0; bi < levels_[l - 1].size(); ++bi) {
      Box& b = levels_[l - 1][bi];
      const auto& mask = covered_[l - 1][bi];
      const int nbx = b.nx / kNxb;
      for (int j = 0; j < b.ny; ++j) {
        for (int i = 0; i < b.nx; ++i) {
          if (mask[static_cast<std::size_t>((j / kNyb) * nbx + i / kNxb)] == 0) continue;
          const std::int64_t fi = 2 * (b.ilo + i);
          const std::int64_t fj = 2 * (b.jlo + j);
          const auto c00 = locate(static_cast<int>(l), fi, fj);
          const auto c10 = locate(static_cast<int>(l), fi + 1, fj);
          const auto c01 = locate(static_cast<int>(l), fi, fj + 1);
          const auto c11 = locate(static_cast<int>(l), fi + 1, fj + 1);
          for (int v = 0; v < kNumVars; ++v) {
            b.data.at(v, i, j) = restrict_quartet(c00->patch->at(v, c00->i, c00->j), c10->patch->at(v, c10->i, c10->j),
                                                  c01->patch->at(v, c01->i, c01->j), c11->patch->at(v, c11->i, c11->j));
          }
        }
      }
    }
  }
  guards_filled_ = false;
}

std::int64_t LevelMesh::num_cells(std::size_t l) const {
  std::int64_t n = 0;
  for (const Box& b : levels_.at(l)) n += b.num_cells();
  return n;
}

void LevelMesh::regrid(const RefineConfig& cfg, const LeafFixup& fixup) {
  cfg.validate();
  OctreeMesh tree = level_to_octree(*this);
  tree.fill_guards();
  const Domain& d = domain_;
  const int buf = cfg.buffer_cells;

  // Blocks whose dilated extent contains a tagged cell of the same level.
  std::set<BlockKey> flagged;
  for (const Block& b : tree.blocks()) {
    if (b.key.level >= d.max_level) continue;
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        double ind = 0.0;
        for (Var v : cfg.vars) ind = std::max(ind, lohner_cell(b.data, idx(v), i, j, cfg.filter));
        if (!(ind > cfg.refine_thresh)) continue;
        const std::int64_t gi = b.key.ix * kNxb + i;
        const std::int64_t gj = b.key.iy * kNyb + j;
        const std::int64_t bx0 = std::max<std::int64_t>(0, (gi - buf) / kNxb);
        const std::int64_t by0 = std::max<std::int64_t>(0, (gj - buf) / kNyb);
        const std::int64_t bx1 = std::min<std::int64_t>(d.nblocks_x(b.key.level) - 1, (gi + buf) / kNxb);
        const std::int64_t by1 = std::min<std::int64_t>(d.nblocks_y(b.key.level) - 1, (gj + buf) / kNyb);
        for (std::int64_t by = by0; by <= by1; ++by) {
          for (std::int64_t bx = bx0; bx <= bx1; ++bx) {
            const BlockKey k{b.key.level, bx, by};
            if (tree.find(k) >= 0) flagged.insert(k);
          }
        }
      }
    }
  }

  LeafSet next;
  std::vector<BlockKey> stack;
  for (std::int64_t iy = 0; iy < d.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < d.base_nx; ++ix) stack.push_back(BlockKey{0, ix, iy});
  }
  while (!stack.empty()) {
    const BlockKey k = stack.back();
    stack.pop_back();
    if (flagged.count(k) == 0) {
      next.insert(k);
      continue;
    }
    for (int q = 0; q < 4; ++q) stack.push_back(k.child(q));
  }
  balance(next, d);

  if (next == tree.leaf_set()) return;
  *this = octree_to_level(rebuild_with_leaves(tree, next, fixup));
}

}  // namespace amrckpt
