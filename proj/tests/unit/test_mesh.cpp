#include <doctest.h>

#include <cmath>

#include "amrckpt/convert.hpp"
#include "amrckpt/errors.hpp"
#include "amrckpt/interp.hpp"
#include "support.hpp"

using namespace amrckpt;
using namespace amrckpt::testing;

namespace {

Domain unit_domain(int base, int max_level) {
  Domain d;
  d.base_nx = base;
  d.base_ny = base;
  d.max_level = max_level;
  return d;
}

PatchData filled(const Domain& d, const BlockKey& k, double (*f)(int, double, double)) {
  PatchData p(kNxb, kNyb);
  for (int v = 0; v < kNumVars; ++v) {
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        p.at(v, i, j) = f(v, d.cell_center_x(k.level, k.ix * kNxb + i), d.cell_center_y(k.level, k.iy * kNyb + j));
      }
    }
  }
  return p;
}

std::map<BlockKey, PatchData> leaf_data(const Domain& d, const LeafSet& leaves, double (*f)(int, double, double)) {
  std::map<BlockKey, PatchData> out;
  for (const auto& k : leaves) out.emplace(k, filled(d, k, f));
  return out;
}

double constant_field(int, double, double) { return 3.25; }
double step_field(int, double x, double) { return x < 0.3 ? 1.0 : 2.0; }

// Independent balance check: any two touching leaves (edge or corner)
// differ by at most one level.
bool balanced_by_geometry(const Domain& d, const LeafSet& leaves) {
  const std::vector<BlockKey> keys(leaves.begin(), leaves.end());
  for (std::size_t a = 0; a < keys.size(); ++a) {
    const BoundingBox ba = d.bnd_box(keys[a]);
    for (std::size_t b = a + 1; b < keys.size(); ++b) {
      if (std::abs(keys[a].level - keys[b].level) <= 1) continue;
      const BoundingBox bb = d.bnd_box(keys[b]);
      const bool touch = ba.lo[0] <= bb.hi[0] && bb.lo[0] <= ba.hi[0] && ba.lo[1] <= bb.hi[1] && bb.lo[1] <= ba.hi[1];
      if (touch) return false;
    }
  }
  return true;
}

double leaf_area(const Domain& d, const LeafSet& leaves) {
  double area = 0.0;
  for (const auto& k : leaves) area += d.block_width_x(k.level) * d.block_width_y(k.level);
  return area;
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("initial meshes tile the domain with level-0 leaves") {
  const OctreeMesh one = make_initial_mesh(unit_domain(1, 0));
  CHECK(one.num_leaves() == 1);
  const OctreeMesh big = make_initial_mesh(unit_domain(16, 0));
  CHECK(big.num_leaves() == 256);
  for (const auto& b : big.blocks()) CHECK(b.bnd_box.hi[0] - b.bnd_box.lo[0] == doctest::Approx(1.0 / 16));
  const OctreeMesh four = make_initial_mesh(unit_domain(2, 0));
  const Block& b0 = four.blocks().front();
  CHECK(b0.bnd_box.lo[0] == 0.0);
  CHECK(b0.bnd_box.hi[0] == 0.5);
  CHECK(b0.bnd_box.hi[1] == 0.5);
  CHECK(b0.coord[0] == 0.25);
  CHECK(b0.coord[1] == 0.25);
  Domain bad;
  bad.base_nx = 0;
  CHECK_THROWS_AS(make_initial_mesh(bad), ConfigError);
}

TEST_CASE("blocks are stored levels ascending, morton within level") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Domain d = random_domain(rng);
    const auto leaves = random_leaf_set(rng, d);
    const OctreeMesh m = OctreeMesh::from_leaves(d, random_leaf_data(rng, leaves));
    const auto& blocks = m.blocks();
    for (std::size_t i = 1; i < blocks.size(); ++i) CHECK(canonical_less(blocks[i - 1].key, blocks[i].key));
    for (const auto& b : blocks) {
      CHECK(b.coord[0] == doctest::Approx(0.5 * (b.bnd_box.lo[0] + b.bnd_box.hi[0])));
      if (b.is_leaf()) continue;
      for (int q = 0; q < 4; ++q) {
        REQUIRE(b.children[q] >= 0);
        const Block& c = blocks[static_cast<std::size_t>(b.children[q])];
        CHECK(c.key == b.key.child(q));
        CHECK(blocks[static_cast<std::size_t>(c.parent)].key == b.key);
      }
      const bool has_leaf_child = std::any_of(b.children.begin(), b.children.end(), [&](int c) {
        return blocks[static_cast<std::size_t>(c)].is_leaf();
      });
      CHECK(b.nodetype == (has_leaf_child ? NodeType::Parent : NodeType::Ancestor));
    }
    CHECK(m.leaf_set() == leaves);
  }
}

TEST_CASE("leaves tile the domain exactly once and are balanced") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Domain d = random_domain(rng);
    const LeafSet leaves = random_leaf_set(rng, d, 0.5);
    CHECK(leaf_area(d, leaves) == doctest::Approx((d.xhi - d.xlo) * (d.yhi - d.ylo)).epsilon(1e-12));
    for (const auto& k : leaves) {
      if (k.level > 0) CHECK_FALSE(covering_leaf(leaves, k.parent()).has_value());
      CHECK(covering_leaf(leaves, k) == k);
    }
    CHECK(is_balanced(leaves, d));
    CHECK(balanced_by_geometry(d, leaves));
  }
}

TEST_CASE("balance refines a neighbour two levels coarser") {
  Domain d;
  d.xhi = 2.0;
  d.base_nx = 2;
  d.base_ny = 1;
  d.max_level = 3;
  // Right root split, and its lower-left child split again: that child's
  // children touch the unsplit left root across an edge.
  LeafSet leaves{{1, 3, 0}, {1, 2, 1}, {1, 3, 1}, {2, 4, 0}, {2, 5, 0}, {2, 4, 1}, {2, 5, 1}, {0, 0, 0}};
  CHECK_FALSE(is_balanced(leaves, d));
  CHECK_FALSE(balanced_by_geometry(d, leaves));
  balance(leaves, d);
  CHECK(is_balanced(leaves, d));
  CHECK(balanced_by_geometry(d, leaves));
  CHECK(leaves.count({0, 0, 0}) == 0);
  CHECK(leaves.count({1, 1, 0}) == 1);
}

TEST_CASE("from_leaves rejects broken leaf sets") {
  const Domain d = unit_domain(1, 2);
  Rng rng(1);
  const LeafSet overlap{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}};
  CHECK_THROWS_AS(OctreeMesh::from_leaves(d, random_leaf_data(rng, overlap)), StructureError);
  const LeafSet incomplete{{1, 0, 0}, {1, 1, 0}, {1, 0, 1}};
  CHECK_THROWS_AS(OctreeMesh::from_leaves(d, random_leaf_data(rng, incomplete)), StructureError);
  const LeafSet outside{{1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 1}, {1, 2, 0}};
  CHECK_THROWS(OctreeMesh::from_leaves(d, random_leaf_data(rng, outside)));
}

TEST_CASE("indicator vanishes on constant and linear data") {
  const Domain d = unit_domain(4, 1);
  LeafSet leaves;
  for (int iy = 0; iy < 4; ++iy) {
    for (int ix = 0; ix < 4; ++ix) leaves.insert({0, ix, iy});
  }
  OctreeMesh c = OctreeMesh::from_leaves(d, leaf_data(d, leaves, constant_field));
  CHECK_THROWS_AS(error_indicator(c, Var::Dens), PreconditionError);
  c.fill_guards();
  for (double e : error_indicator(c, Var::Dens)) CHECK(e == 0.0);

  OctreeMesh lin = OctreeMesh::from_leaves(d, leaf_data(d, leaves, linear_field));
  lin.fill_guards();
  const auto ind = error_indicator(lin, Var::Pres);
  const auto lv = lin.leaves();
  for (std::size_t k = 0; k < lv.size(); ++k) {
    const bool interior = lv[k].key.ix > 0 && lv[k].key.iy > 0 && lv[k].key.ix < 3 && lv[k].key.iy < 3;
    if (interior) CHECK(ind[k] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("a step raises the indicator of its block above smooth neighbours") {
  const Domain d = unit_domain(4, 1);
  LeafSet leaves;
  for (int iy = 0; iy < 4; ++iy) {
    for (int ix = 0; ix < 4; ++ix) leaves.insert({0, ix, iy});
  }
  OctreeMesh m = OctreeMesh::from_leaves(d, leaf_data(d, leaves, step_field));
  m.fill_guards();
  const auto ind = error_indicator(m, Var::Dens);
  const auto lv = m.leaves();
  for (std::size_t k = 0; k < lv.size(); ++k) {
    // The jump at x = 0.3 lies inside column 1 of blocks and touches column 0 and 2 only via guards.
    if (lv[k].key.ix == 1) CHECK(ind[k] > 0.9);
    if (lv[k].key.ix == 3) CHECK(ind[k] == 0.0);
  }
}

TEST_CASE("lohner estimator on a three-cell stencil") {
  PatchData p(kNxb, kNyb, 1);
  p.fill(0, 0.0);
  p.at(0, 4, 3) = 1.0;
  // x stencil (0, 0, 1): |1 - 0 + 0| / (|1 - 0| + 0 + 0.01 * 1); y stencil all zero.
  CHECK(lohner_cell(p, 0, 3, 3, 0.01) == doctest::Approx(1.0 / 1.01));
  CHECK(lohner_cell(p, 0, 1, 1, 0.01) == 0.0);
}

TEST_CASE("refine_step splits a flagged block and keeps a quiet mesh") {
  const Domain d = unit_domain(1, 2);
  OctreeMesh quiet = make_initial_mesh(d);
  quiet.fill_guards();
  CHECK(refine_step(quiet, RefineConfig{}).leaf_set() == quiet.leaf_set());

  LeafSet root{{0, 0, 0}};
  OctreeMesh m = OctreeMesh::from_leaves(d, leaf_data(d, root, step_field));
  m.fill_guards();
  const OctreeMesh r = refine_step(m, RefineConfig{});
  CHECK(r.blocks().size() == 5);
  CHECK(r.num_leaves() == 4);
  CHECK(r.blocks().front().nodetype == NodeType::Parent);
}

TEST_CASE("refinement reaches a fixed point on a static field") {
  const Domain d = unit_domain(2, 3);
  OctreeMesh m = make_initial_mesh(d);
  for (int round = 0; round < 12; ++round) {
    std::map<BlockKey, PatchData> data;
    for (const auto& k : m.leaf_set()) data.emplace(k, filled(d, k, step_field));
    m = OctreeMesh::from_leaves(d, std::move(data));
    m.fill_guards();
    const OctreeMesh next = refine_step(m, RefineConfig{});
    if (next.leaf_set() == m.leaf_set()) break;
    m = next;
  }
  std::map<BlockKey, PatchData> data;
  for (const auto& k : m.leaf_set()) data.emplace(k, filled(d, k, step_field));
  m = OctreeMesh::from_leaves(d, std::move(data));
  m.fill_guards();
  CHECK(refine_step(m, RefineConfig{}).leaf_set() == m.leaf_set());
  CHECK(finest_leaf_level(m) == 3);
  CHECK(is_balanced(m.leaf_set(), d));
}

TEST_CASE("guards copy same-level neighbours exactly") {
  const Domain d = unit_domain(2, 0);
  Rng rng(9);
  LeafSet leaves{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1}};
  OctreeMesh m = OctreeMesh::from_leaves(d, random_leaf_data(rng, leaves));
  m.fill_guards();
  const Block& left = m.blocks()[static_cast<std::size_t>(m.find({0, 0, 0}))];
  const Block& right = m.blocks()[static_cast<std::size_t>(m.find({0, 1, 0}))];
  for (int v = 0; v < kNumVars; ++v) {
    for (int j = 0; j < kNyb; ++j) {
      CHECK(left.data.at(v, kNxb, j) == right.data.at(v, 0, j));
      CHECK(right.data.at(v, -1, j) == left.data.at(v, kNxb - 1, j));
      // Domain boundary: zero gradient.
      CHECK(left.data.at(v, -1, j) == left.data.at(v, 0, j));
    }
  }
}

TEST_CASE("guards reproduce linear fields across every interface") {
  Rng rng(21);
  const Domain d = unit_domain(2, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const LeafSet leaves = random_leaf_set(rng, d, 0.5);
    for (const auto rep : {Representation::Octree, Representation::Level}) {
      const auto mesh = mesh_from_leaves(d, leaf_data(d, leaves, linear_field), rep);
      double worst = 0.0;
      for (const auto& leaf : mesh->leaves()) {
        const BlockKey& k = leaf.key;
        for (int j = -1; j <= kNyb; ++j) {
          for (int i = -1; i <= kNxb; ++i) {
            const std::int64_t gi = k.ix * kNxb + i;
            const std::int64_t gj = k.iy * kNyb + j;
            if (!d.contains_cell(k.level, gi, gj)) continue;
            const double want = linear_field(idx(Var::Ener), d.cell_center_x(k.level, gi), d.cell_center_y(k.level, gj));
            worst = std::max(worst, std::abs(leaf.value(idx(Var::Ener), i, j) - want));
          }
        }
      }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("constant fields give constant guards everywhere") {
  Rng rng(4);
  const Domain d = unit_domain(2, 2);
  const LeafSet leaves = random_leaf_set(rng, d, 0.6);
  const auto mesh = mesh_from_leaves(d, leaf_data(d, leaves, constant_field), Representation::Octree);
  for (const auto& leaf : mesh->leaves()) {
    for (int j = -1; j <= kNyb; ++j) {
      for (int i = -1; i <= kNxb; ++i) CHECK(leaf.value(0, i, j) == 3.25);
    }
  }
}

TEST_CASE("restriction averages child quartets") {
  CHECK(restrict_quartet(1.0, 2.0, 3.0, 4.0) == 2.5);
  const Domain d = unit_domain(1, 1);
  std::map<BlockKey, PatchData> data;
  for (int q = 0; q < 4; ++q) {
    PatchData p(kNxb, kNyb);
    for (int v = 0; v < kNumVars; ++v) p.fill(v, 7.0);
    data.emplace(BlockKey{0, 0, 0}.child(q), std::move(p));
  }
  const OctreeMesh m = OctreeMesh::from_leaves(d, std::move(data));
  const Block& root = m.blocks().front();
  for (int j = 0; j < kNyb; ++j) {
    for (int i = 0; i < kNxb; ++i) CHECK(root.data.at(Var::Dens, i, j) == 7.0);
  }
}

TEST_CASE("restriction then prolongation reproduces linear parent data") {
  const Domain d = unit_domain(1, 1);
  LeafSet kids;
  for (int q = 0; q < 4; ++q) kids.insert(BlockKey{0, 0, 0}.child(q));
  const OctreeMesh m = OctreeMesh::from_leaves(d, leaf_data(d, kids, linear_field));
  const Block& root = m.blocks().front();
  for (int j = 0; j < kNyb; ++j) {
    for (int i = 0; i < kNxb; ++i) {
      CHECK(root.data.at(Var::Dens, i, j) ==
            doctest::Approx(linear_field(0, d.cell_center_x(0, i), d.cell_center_y(0, j))).epsilon(1e-14));
    }
  }
  // Prolong from a lone root back to level 1.
  const auto coarse = mesh_from_leaves(d, leaf_data(d, LeafSet{{0, 0, 0}}, linear_field), Representation::Octree);
  for (std::int64_t j = 0; j < 16; ++j) {
    for (std::int64_t i = 0; i < 16; ++i) {
      const CellValues v = sample_cell(*coarse, 1, i, j);
      CHECK(v[0] == linear_field(0, d.cell_center_x(1, i), d.cell_center_y(1, j)));
    }
  }
}

TEST_CASE("minmod picks the smaller slope of equal sign") {
  CHECK(minmod(1.0, 2.0) == 1.0);
  CHECK(minmod(-3.0, -2.0) == -2.0);
  CHECK(minmod(1.0, -1.0) == 0.0);
  CHECK(minmod(0.0, 5.0) == 0.0);
}

TEST_CASE("level mesh validates its boxes") {
  const Domain d = unit_domain(2, 2);
  auto level0 = [] {
    std::vector<Box> l;
    l.emplace_back(0, 0, 16, 16);
    return l;
  };
  CHECK_NOTHROW(LevelMesh(d, {level0()}));
  std::vector<Box> misaligned;
  misaligned.emplace_back(4, 0, 8, 8);
  CHECK_THROWS_AS(LevelMesh(d, {level0(), misaligned}), AlignmentError);
  std::vector<Box> overlapping;
  overlapping.emplace_back(0, 0, 16, 8);
  overlapping.emplace_back(8, 0, 8, 8);
  CHECK_THROWS_AS(LevelMesh(d, {level0(), overlapping}), StructureError);
  std::vector<Box> outside;
  outside.emplace_back(32, 0, 8, 8);
  CHECK_THROWS_AS(LevelMesh(d, {level0(), outside}), StructureError);
  // Level 2 box over a region level 1 does not have.
  std::vector<Box> l1;
  l1.emplace_back(0, 0, 16, 16);
  std::vector<Box> l2;
  l2.emplace_back(48, 48, 16, 16);
  CHECK_THROWS_AS(LevelMesh(d, {level0(), l1, l2}), StructureError);
  std::vector<Box> partial;
  partial.emplace_back(0, 0, 8, 8);
  CHECK_THROWS_AS(LevelMesh(d, {partial}), StructureError);
}

TEST_CASE("octree to level merges blocks into boxes") {
  const OctreeMesh one = make_initial_mesh(unit_domain(1, 0));
  const LevelMesh l1 = octree_to_level(one);
  REQUIRE(l1.num_levels() == 1);
  REQUIRE(l1.level(0).size() == 1);
  CHECK(l1.level(0)[0].nx == 8);
  CHECK(l1.level(0)[0].ny == 8);

  const LevelMesh l4 = octree_to_level(make_initial_mesh(unit_domain(2, 0)));
  REQUIRE(l4.level(0).size() == 1);
  CHECK(l4.level(0)[0].nx == 16);
  CHECK(l4.level(0)[0].ny == 16);

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Domain d = random_domain(rng);
    const OctreeMesh m = OctreeMesh::from_leaves(d, random_leaf_data(rng, random_leaf_set(rng, d)));
    const LevelMesh lm = octree_to_level(m);
    std::vector<std::int64_t> blocks_per_level(lm.num_levels(), 0);
    for (const auto& b : m.blocks()) blocks_per_level[static_cast<std::size_t>(b.level())]++;
    for (std::size_t l = 0; l < lm.num_levels(); ++l) CHECK(lm.num_cells(l) == blocks_per_level[l] * kCellsPerBlock);
    CHECK(leaf_keys(lm) == leaf_keys(m));
  }
}

TEST_CASE("octree to level refuses unbalanced trees") {
  const Domain d = unit_domain(2, 3);
  LeafSet leaves{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 3, 0}, {1, 2, 1}, {1, 3, 1}, {2, 4, 0}, {2, 5, 0}, {2, 4, 1}, {2, 5, 1}};
  REQUIRE_FALSE(is_balanced(leaves, d));
  Rng rng(2);
  const OctreeMesh m = OctreeMesh::from_leaves(d, random_leaf_data(rng, leaves));
  CHECK_THROWS_AS(octree_to_level(m), InvariantError);
}

TEST_CASE("a full level-1 box gives a parent root with four leaves") {
  const Domain d = unit_domain(1, 1);
  std::vector<Box> l0, l1;
  l0.emplace_back(0, 0, 8, 8);
  l1.emplace_back(0, 0, 16, 16);
  const OctreeMesh m = level_to_octree(LevelMesh(d, {std::move(l0), std::move(l1)}));
  REQUIRE(m.blocks().size() == 5);
  CHECK(m.blocks().front().nodetype == NodeType::Parent);
  CHECK(m.num_leaves() == 4);
}

TEST_CASE("level to octree inverts octree to level") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Domain d = random_domain(rng);
    const OctreeMesh m = OctreeMesh::from_leaves(d, random_leaf_data(rng, random_leaf_set(rng, d)));
    const OctreeMesh back = level_to_octree(octree_to_level(m));
    REQUIRE(back.blocks().size() == m.blocks().size());
    for (std::size_t b = 0; b < m.blocks().size(); ++b) {
      CHECK(back.blocks()[b].key == m.blocks()[b].key);
      CHECK(back.blocks()[b].nodetype == m.blocks()[b].nodetype);
      const auto x = m.blocks()[b].data.raw();
      const auto y = back.blocks()[b].data.raw();
      bool same = true;
      for (int v = 0; v < kNumVars && same; ++v) {
        for (int j = 0; j < kNyb; ++j) {
          for (int i = 0; i < kNxb; ++i) same = same && m.blocks()[b].data.at(v, i, j) == back.blocks()[b].data.at(v, i, j);
        }
      }
      CHECK(same);
      CHECK(x.size() == y.size());
    }
  }
}

TEST_CASE("both representations regrid around a step and stay balanced") {
  const Domain d = unit_domain(2, 2);
  for (const auto rep : {Representation::Octree, Representation::Level}) {
    LeafSet base;
    for (int iy = 0; iy < 2; ++iy) {
      for (int ix = 0; ix < 2; ++ix) base.insert({0, ix, iy});
    }
    auto mesh = mesh_from_leaves(d, leaf_data(d, base, step_field), rep);
    mesh->regrid(RefineConfig{}, {});
    mesh->fill_guards();
    const auto keys = leaf_keys(*mesh);
    CHECK(keys.size() > 4);
    const LeafSet set(keys.begin(), keys.end());
    CHECK(is_balanced(set, d));
    CHECK(balanced_by_geometry(d, set));
    for (const auto& k : keys) {
      if (k.level > 0) {
        const BoundingBox b = d.bnd_box(k);
        // Only the level-0 column holding the jump refines.
        CHECK(b.hi[0] <= 0.5);
      }
    }
  }
}

TEST_CASE("convert_mesh preserves leaves and data both ways") {
  Rng rng(17);
  const Domain d = random_domain(rng);
  const auto oct = random_mesh(rng, d, Representation::Octree);
  const auto lvl = convert_mesh(*oct, Representation::Level);
  CHECK(lvl->rep() == Representation::Level);
  const auto a = oct->leaves();
  const auto b = lvl->leaves();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].key == b[k].key);
    for (int j = -1; j <= kNyb; ++j) {
      for (int i = -1; i <= kNxb; ++i) CHECK(a[k].value(1, i, j) == b[k].value(1, i, j));
    }
  }
}

}  // TEST_SUITE
