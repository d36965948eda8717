#include "amrckpt/octree_mesh.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "amrckpt/errors.hpp"
#include "amrckpt/interp.hpp"

namespace amrckpt {

namespace {

std::string key_str(const BlockKey& k) {
  return "(level " + std::to_string(k.level) + ", " + std::to_string(k.ix) + ", " + std::to_string(k.iy) + ")";
}

template <typename Fn>
void for_each_neighbor(const BlockKey& k, const Domain& d, Fn&& fn) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const BlockKey nk{k.level, k.ix + dx, k.iy + dy};
      if (d.contains_block(nk)) fn(nk, dx, dy);
    }
  }
}

double block_indicator(const PatchData& data, const RefineConfig& cfg) {
  double best = 0.0;
  for (Var v : cfg.vars) {
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) best = std::max(best, lohner_cell(data, idx(v), i, j, cfg.filter));
    }
  }
  return best;
}

// Whether turning parent `p` into a leaf keeps every leaf adjacent to it within
// one level of it.
bool merge_keeps_balance(const LeafSet& leaves, const BlockKey& p, const Domain& d) {
  bool ok = true;
  for_each_neighbor(p, d, [&](const BlockKey& n, int dx, int dy) {
    if (!ok || covering_leaf(leaves, n)) return;
    for (int q = 0; q < 4; ++q) {
      const int cx = q & 1;
      const int cy = q >> 1;
      const bool touches = (dx == 0 || cx == (dx > 0 ? 0 : 1)) && (dy == 0 || cy == (dy > 0 ? 0 : 1));
      if (touches && leaves.count(n.child(q)) == 0) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

}  // namespace

OctreeMesh OctreeMesh::from_leaves(const Domain& domain, std::map<BlockKey, PatchData> leaves) {
  domain.validate();
  LeafSet leaf_keys;
  LeafSet inner;
  for (const auto& [k, data] : leaves) {
    if (!domain.contains_block(k) || k.level > domain.max_level) {
      throw StructureError("block " + key_str(k) + " lies outside the domain or above max_level");
    }
    if (data.nx() != kNxb || data.ny() != kNyb || data.nvar() != kNumVars) {
      throw StructureError("block " + key_str(k) + " data has the wrong shape");
    }
    leaf_keys.insert(k);
  }
  for (const auto& k : leaf_keys) {
    BlockKey p = k;
    while (p.level > 0) {
      p = p.parent();
      if (leaf_keys.count(p) != 0) {
        throw StructureError("leaf " + key_str(k) + " overlaps leaf " + key_str(p));
      }
      if (!inner.insert(p).second) break;
    }
  }
  for (const auto& n : inner) {
    for (int q = 0; q < 4; ++q) {
      const BlockKey c = n.child(q);
      if (leaf_keys.count(c) == 0 && inner.count(c) == 0) {
        throw StructureError("block " + key_str(n) + " has an incomplete child quartet (missing " + key_str(c) + ")");
      }
    }
  }
  for (std::int64_t iy = 0; iy < domain.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < domain.base_nx; ++ix) {
      const BlockKey k{0, ix, iy};
      if (leaf_keys.count(k) == 0 && inner.count(k) == 0) {
        throw StructureError("level-0 block " + key_str(k) + " is not covered");
      }
    }
  }

  std::vector<BlockKey> order(leaf_keys.begin(), leaf_keys.end());
  order.insert(order.end(), inner.begin(), inner.end());
  std::sort(order.begin(), order.end(), canonical_less);

  OctreeMesh mesh;
  mesh.domain_ = domain;
  mesh.blocks_.reserve(order.size());
  for (const auto& k : order) {
    Block b;
    b.key = k;
    b.bnd_box = domain.bnd_box(k);
    b.coord = domain.block_center(k);
    b.morton = morton_key(static_cast<std::uint32_t>(k.ix), static_cast<std::uint32_t>(k.iy));
    if (auto it = leaves.find(k); it != leaves.end()) {
      b.nodetype = NodeType::Leaf;
      b.data = std::move(it->second);
    } else {
      b.nodetype = NodeType::Parent;
    }
    mesh.blocks_.push_back(std::move(b));
  }
  mesh.rebuild_index();
  for (std::size_t bi = 0; bi < mesh.blocks_.size(); ++bi) {
    Block& b = mesh.blocks_[bi];
    if (b.key.level > 0) b.parent = mesh.find(b.key.parent());
    if (b.is_leaf()) continue;
    bool any_leaf_child = false;
    for (int q = 0; q < 4; ++q) {
      b.children[static_cast<std::size_t>(q)] = mesh.find(b.key.child(q));
      any_leaf_child = any_leaf_child || leaf_keys.count(b.key.child(q)) != 0;
    }
    b.nodetype = any_leaf_child ? NodeType::Parent : NodeType::Ancestor;
  }
  mesh.restrict_to_parents();
  return mesh;
}

void OctreeMesh::rebuild_index() {
  index_.clear();
  index_.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) index_.emplace(blocks_[i].key, static_cast<int>(i));
}

std::unique_ptr<MeshAccess> OctreeMesh::clone() const { return std::make_unique<OctreeMesh>(*this); }

int OctreeMesh::find(const BlockKey& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

bool OctreeMesh::is_leaf(const BlockKey& key) const {
  const int i = find(key);
  return i >= 0 && blocks_[static_cast<std::size_t>(i)].is_leaf();
}

Block& OctreeMesh::block_mut(int index) {
  guards_filled_ = false;
  return blocks_.at(static_cast<std::size_t>(index));
}

std::optional<CellRef> OctreeMesh::locate(int level, std::int64_t i, std::int64_t j) const {
  if (i < 0 || j < 0) return std::nullopt;
  const int bi = find(BlockKey{level, i / kNxb, j / kNyb});
  if (bi < 0) return std::nullopt;
  return CellRef{&blocks_[static_cast<std::size_t>(bi)].data, static_cast<int>(i % kNxb),
                 static_cast<int>(j % kNyb)};
}

std::vector<LeafRef> OctreeMesh::leaves() const {
  std::vector<LeafRef> out;
  for (const auto& b : blocks_) {
    if (b.is_leaf()) out.push_back(LeafRef{b.key, &b.data, 0, 0});
  }
  return out;
}

std::vector<SolverPatch> OctreeMesh::solver_patches() {
  std::vector<SolverPatch> out;
  for (auto& b : blocks_) {
    if (b.is_leaf()) out.push_back(SolverPatch{b.key.level, b.key.ix * kNxb, b.key.iy * kNyb, &b.data, nullptr});
  }
  return out;
}

std::size_t OctreeMesh::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.is_leaf(); }));
}

LeafSet OctreeMesh::leaf_set() const {
  LeafSet s;
  for (const auto& b : blocks_) {
    if (b.is_leaf()) s.insert(b.key);
  }
  return s;
}

void OctreeMesh::fill_guards() {
  for (auto& b : blocks_) fill_patch_guards(*this, b.data, b.key.level, b.key.ix * kNxb, b.key.iy * kNyb);
  guards_filled_ = true;
}

void OctreeMesh::restrict_to_parents() {
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    Block& b = *it;
    if (b.is_leaf()) continue;
    for (int v = 0; v < kNumVars; ++v) {
      for (int j = 0; j < kNyb; ++j) {
        for (int i = 0; i < kNxb; ++i) {
          const int q = (i >= kNxb / 2 ? 1 : 0) | (j >= kNyb / 2 ? 2 : 0);
          const PatchData& c = blocks_[static_cast<std::size_t>(b.children[static_cast<std::size_t>(q)])].data;
          const int ci = 2 * (i % (kNxb / 2));
          const int cj = 2 * (j % (kNyb / 2));
          b.data.at(v, i, j) = restrict_quartet(c.at(v, ci, cj), c.at(v, ci + 1, cj), c.at(v, ci, cj + 1),
                                                c.at(v, ci + 1, cj + 1));
        }
      }
    }
  }
  guards_filled_ = false;
}

void OctreeMesh::regrid(const RefineConfig& cfg, const LeafFixup& fixup) { *this = refine_step(*this, cfg, fixup); }

OctreeMesh make_initial_mesh(const Domain& domain) {
  domain.validate();
  std::map<BlockKey, PatchData> leaves;
  for (std::int64_t iy = 0; iy < domain.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < domain.base_nx; ++ix) leaves.emplace(BlockKey{0, ix, iy}, PatchData(kNxb, kNyb));
  }
  return OctreeMesh::from_leaves(domain, std::move(leaves));
}

std::vector<double> error_indicator(const OctreeMesh& mesh, Var var, double filter) {
  if (!mesh.guards_filled()) throw PreconditionError("error_indicator requires filled guard cells");
  RefineConfig cfg;
  cfg.vars = {var};
  cfg.filter = filter;
  std::vector<double> out;
  for (const auto& b : mesh.blocks()) {
    if (b.is_leaf()) out.push_back(block_indicator(b.data, cfg));
  }
  return out;
}

std::vector<double> combined_indicator(const OctreeMesh& mesh, const RefineConfig& cfg) {
  if (!mesh.guards_filled()) throw PreconditionError("error_indicator requires filled guard cells");
  std::vector<double> out;
  for (const auto& b : mesh.blocks()) {
    if (b.is_leaf()) out.push_back(block_indicator(b.data, cfg));
  }
  return out;
}

std::optional<BlockKey> covering_leaf(const LeafSet& leaves, const BlockKey& key) {
  BlockKey k = key;
  while (true) {
    if (leaves.count(k) != 0) return k;
    if (k.level == 0) return std::nullopt;
    k = k.parent();
  }
}

bool is_balanced(const LeafSet& leaves, const Domain& domain) {
  for (const auto& b : leaves) {
    if (b.level < 2) continue;
    bool ok = true;
    for_each_neighbor(b, domain, [&](const BlockKey& n, int, int) {
      const auto c = covering_leaf(leaves, n);
      if (c && c->level < b.level - 1) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

void balance(LeafSet& leaves, const Domain& domain) {
  while (true) {
    LeafSet to_split;
    for (const auto& b : leaves) {
      if (b.level < 2) continue;
      for_each_neighbor(b, domain, [&](const BlockKey& n, int, int) {
        const auto c = covering_leaf(leaves, n);
        if (c && c->level < b.level - 1) to_split.insert(*c);
      });
    }
    if (to_split.empty()) return;
    for (const auto& c : to_split) {
      if (leaves.erase(c) == 0) continue;
      for (int q = 0; q < 4; ++q) leaves.insert(c.child(q));
    }
  }
}

OctreeMesh rebuild_with_leaves(const OctreeMesh& old, const LeafSet& leaves, const LeafFixup& fixup) {
  std::map<BlockKey, PatchData> data;
  for (const auto& k : leaves) {
    const int bi = old.find(k);
    if (bi >= 0 && old.blocks()[static_cast<std::size_t>(bi)].is_leaf()) {
      data.emplace(k, old.blocks()[static_cast<std::size_t>(bi)].data);
      continue;
    }
    PatchData pd(kNxb, kNyb);
    if (bi >= 0) {
      const Block& b = old.blocks()[static_cast<std::size_t>(bi)];
      for (int v = 0; v < kNumVars; ++v) {
        for (int j = 0; j < kNyb; ++j) {
          for (int i = 0; i < kNxb; ++i) {
            const int q = (i >= kNxb / 2 ? 1 : 0) | (j >= kNyb / 2 ? 2 : 0);
            const PatchData& c = old.blocks()[static_cast<std::size_t>(b.children[static_cast<std::size_t>(q)])].data;
            const int ci = 2 * (i % (kNxb / 2));
            const int cj = 2 * (j % (kNyb / 2));
            pd.at(v, i, j) =
                restrict_quartet(c.at(v, ci, cj), c.at(v, ci + 1, cj), c.at(v, ci, cj + 1), c.at(v, ci + 1, cj + 1));
          }
        }
      }
    } else {
      for (int j = 0; j < kNyb; ++j) {
        for (int i = 0; i < kNxb; ++i) {
          const CellValues vals = sample_cell(old, k.level, k.ix * kNxb + i, k.iy * kNyb + j);
          for (int v = 0; v < kNumVars; ++v) pd.at(v, i, j) = vals[static_cast<std::size_t>(v)];
        }
      }
    }
    if (fixup) fixup(pd);
    data.emplace(k, std::move(pd));
  }
  return OctreeMesh::from_leaves(old.domain(), std::move(data));
}

OctreeMesh refine_step(const OctreeMesh& mesh, const RefineConfig& cfg, const LeafFixup& fixup) {
  cfg.validate();
  if (!mesh.guards_filled()) throw PreconditionError("refine_step requires filled guard cells");
  const Domain& d = mesh.domain();

  std::unordered_map<BlockKey, double, BlockKeyHash> indicator;
  for (const auto& b : mesh.blocks()) indicator.emplace(b.key, block_indicator(b.data, cfg));

  const LeafSet original = mesh.leaf_set();
  LeafSet next = original;
  for (const auto& k : original) {
    if (indicator.at(k) > cfg.refine_thresh && k.level < d.max_level) {
      next.erase(k);
      for (int q = 0; q < 4; ++q) next.insert(k.child(q));
    }
  }
  balance(next, d);

  for (const auto& b : mesh.blocks()) {
    if (b.nodetype != NodeType::Parent) continue;
    bool mergeable = indicator.at(b.key) <= cfg.refine_thresh;
    for (int q = 0; q < 4 && mergeable; ++q) {
      const BlockKey c = b.key.child(q);
      mergeable = original.count(c) != 0 && next.count(c) != 0 && indicator.at(c) < cfg.derefine_thresh;
    }
    if (!mergeable || !merge_keeps_balance(next, b.key, d)) continue;
    for (int q = 0; q < 4; ++q) next.erase(b.key.child(q));
    next.insert(b.key);
  }

  if (next == original) return mesh;
  return rebuild_with_leaves(mesh, next, fixup);
}

void guard_fill(OctreeMesh& mesh) { mesh.fill_guards(); }

void restrict_to_parents(OctreeMesh& mesh) { mesh.restrict_to_parents(); }

}  // namespace amrckpt
