#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "amrckpt/convert.hpp"
#include "amrckpt/errors.hpp"
#include "amrckpt/particles.hpp"
#include "support.hpp"

using namespace amrckpt;
using namespace amrckpt::testing;

namespace {

Domain square(int base, int max_level) {
  Domain d;
  d.base_nx = base;
  d.base_ny = base;
  d.max_level = max_level;
  return d;
}

// Every leaf of `leaves` filled with f, velocity (u, v).
std::unique_ptr<MeshAccess> field_mesh(const Domain& d, const LeafSet& leaves, Representation rep, double u, double v) {
  std::map<BlockKey, PatchData> data;
  for (const auto& k : leaves) {
    PatchData p(kNxb, kNyb);
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        const double x = d.cell_center_x(k.level, k.ix * kNxb + i);
        const double y = d.cell_center_y(k.level, k.iy * kNyb + j);
        p.at(Var::Dens, i, j) = 3.0 - x + 0.5 * y;
        p.at(Var::Temp, i, j) = x + 2.0 * y;
        p.at(Var::Pres, i, j) = 1.0;
        p.at(Var::Ener, i, j) = 1.0;
        p.at(Var::Velx, i, j) = u;
        p.at(Var::Vely, i, j) = v;
      }
    }
    data.emplace(k, std::move(p));
  }
  return mesh_from_leaves(d, std::move(data), rep);
}

// More than half a cell of `level` away from every domain edge; closer to
// the wall the zero-gradient guards flatten the field.
bool off_wall(const Domain& d, int level, double x, double y) {
  const double hx = 0.5 * d.cell_width_x(level), hy = 0.5 * d.cell_width_y(level);
  return x >= d.xlo + hx && x <= d.xhi - hx && y >= d.ylo + hy && y <= d.yhi - hy;
}

LeafSet base_leaves(const Domain& d) {
  LeafSet s;
  for (std::int64_t iy = 0; iy < d.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < d.base_nx; ++ix) s.insert({0, ix, iy});
  }
  return s;
}

}  // namespace

TEST_SUITE("particles") {

TEST_CASE("identity encoding") {
  CHECK(encode_identity(0, 1) == 1);
  CHECK(encode_identity(1, 1) == (std::uint64_t{1} << 40) + 1);
  CHECK(decode_identity(1) == std::pair<std::int64_t, std::int64_t>{0, 1});
  CHECK(decode_identity((std::uint64_t{1} << 40) + 1) == std::pair<std::int64_t, std::int64_t>{1, 1});
  CHECK_THROWS_AS(encode_identity(-1, 1), IdentityOverflowError);
  CHECK_THROWS_AS(encode_identity(kMaxCpuId, 1), IdentityOverflowError);
  CHECK_THROWS_AS(encode_identity(0, 0), IdentityOverflowError);
  CHECK_THROWS_AS(encode_identity(0, kMaxTag), IdentityOverflowError);
  CHECK(encode_identity(kMaxCpuId - 1, kMaxTag - 1) == ~std::uint64_t{0});

  Rng rng(42);
  std::set<std::uint64_t> seen;
  for (int n = 0; n < 1000; ++n) {
    const std::int64_t c = std::uniform_int_distribution<std::int64_t>(0, kMaxCpuId - 1)(rng);
    const std::int64_t t = std::uniform_int_distribution<std::int64_t>(1, kMaxTag - 1)(rng);
    const auto g = encode_identity(c, t);
    CHECK(decode_identity(g) == std::pair{c, t});
    seen.insert(g);
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("lattice initialization") {
  const Domain d = square(4, 0);
  const auto mesh = field_mesh(d, base_leaves(d), Representation::Octree, 0.0, 0.0);

  const ParticleSet one = init_particles(1, 1, *mesh, partition_leaves(*mesh, 4));
  REQUIRE(one.size() == 1);
  CHECK(one.particles[0].posx == 0.5);
  CHECK(one.particles[0].posy == 0.5);
  CHECK(one.particles[0].tag == 1);
  // The center sits on a corner shared by four blocks; the largest Morton key
  // is block (2, 2), the first leaf of rank 3.
  CHECK(one.particles[0].cpu_id == partition_leaves(*mesh, 4).rank_of(find_leaf(*mesh, 0.5, 0.5)));

  for (const int n : {8, 20}) {
    const RankAssignment ranks = partition_leaves(*mesh, 4);
    const ParticleSet ps = init_particles(n, n, *mesh, ranks);
    CHECK(ps.size() == static_cast<std::size_t>(n * n));
    CHECK_NOTHROW(ps.check_identities());
    std::map<std::int64_t, std::vector<std::int64_t>> tags;
    for (const auto& p : ps.particles) {
      CHECK(p.cpu_id == ranks.rank_of(find_leaf(*mesh, p.posx, p.posy)));
      CHECK(p.global_tag == encode_identity(p.cpu_id, p.tag));
      CHECK(p.ptemp == doctest::Approx(p.posx + 2.0 * p.posy).epsilon(1e-14));
      tags[p.cpu_id].push_back(p.tag);
    }
    for (auto& [cpu, t] : tags) {
      std::sort(t.begin(), t.end());
      for (std::size_t k = 0; k < t.size(); ++k) CHECK(t[k] == static_cast<std::int64_t>(k) + 1);
    }
  }
}

TEST_CASE("interpolation reproduces constant and linear fields") {
  Rng rng(7);
  const Domain d = square(2, 2);
  for (const auto rep : {Representation::Octree, Representation::Level}) {
    const auto mesh = field_mesh(d, random_leaf_set(rng, d, 0.5), rep, 0.25, 0.0);
    ParticleSet ps = random_particles(rng, d, 300);
    redistribute(ps, *mesh);
    interpolate_fields(ps, *mesh);
    const auto keys = leaf_keys(*mesh);
    int interior = 0;
    for (const auto& p : ps.particles) {
      CHECK(sample_field(*mesh, Var::Velx, p.posx, p.posy) == doctest::Approx(0.25).epsilon(1e-15));
      const int level = keys[static_cast<std::size_t>(p.block)].level;
      if (off_wall(d, level, p.posx, p.posy)) {
        ++interior;
        CHECK(std::abs(p.ptemp - (p.posx + 2.0 * p.posy)) < 1e-14);
        CHECK(std::abs(p.pdens - (3.0 - p.posx + 0.5 * p.posy)) < 1e-14);
      } else {
        CHECK(p.ptemp >= -1e-14);
        CHECK(p.ptemp <= 3.0 + 1e-14);
      }
    }
    CHECK(interior > 200);
  }
}

TEST_CASE("a particle at a cell center takes that cell's value") {
  Rng rng(3);
  const Domain d = square(1, 0);
  auto mesh = mesh_from_leaves(d, random_leaf_data(rng, base_leaves(d)), Representation::Octree);
  const auto leaf = mesh->leaves().front();
  for (int j = 0; j < kNyb; ++j) {
    for (int i = 0; i < kNxb; ++i) {
      const double x = d.cell_center_x(0, i), y = d.cell_center_y(0, j);
      CHECK(sample_field(*mesh, Var::Temp, x, y) == doctest::Approx(leaf.value(idx(Var::Temp), i, j)).epsilon(1e-15));
    }
  }
}

TEST_CASE("face ties go to the larger morton key") {
  Domain d = square(2, 1);
  const auto mesh = field_mesh(d, base_leaves(d), Representation::Octree, 0.0, 0.0);
  CHECK(find_leaf(*mesh, 0.25, 0.25) == BlockKey{0, 0, 0});
  CHECK(find_leaf(*mesh, 0.5, 0.25) == BlockKey{0, 1, 0});
  CHECK(find_leaf(*mesh, 0.25, 0.5) == BlockKey{0, 0, 1});
  CHECK(find_leaf(*mesh, 0.5, 0.5) == BlockKey{0, 1, 1});
  CHECK(find_leaf(*mesh, 0.0, 0.0) == BlockKey{0, 0, 0});
  CHECK(find_leaf(*mesh, 1.0, 1.0) == BlockKey{0, 1, 1});
  CHECK_THROWS_AS(find_leaf(*mesh, 1.5, 0.5), OwnershipError);
  ParticleSet ps;
  Particle p;
  p.cpu_id = 0;
  p.tag = 1;
  p.global_tag = 1;
  p.posx = 0.5;
  p.posy = 0.75;
  ps.particles.push_back(p);
  redistribute(ps, *mesh);
  CHECK(leaf_keys(*mesh)[static_cast<std::size_t>(ps.particles[0].block)] == BlockKey{0, 1, 1});
}

TEST_CASE("particles of a split block move to its children") {
  Rng rng(19);
  const Domain d = square(2, 1);
  const auto coarse = field_mesh(d, base_leaves(d), Representation::Octree, 0.0, 0.0);
  ParticleSet ps = random_particles(rng, d, 200);
  redistribute(ps, *coarse);
  const auto coarse_keys = leaf_keys(*coarse);
  std::vector<BlockKey> before;
  for (const auto& p : ps.particles) before.push_back(coarse_keys[static_cast<std::size_t>(p.block)]);

  LeafSet split = base_leaves(d);
  split.erase({0, 1, 0});
  for (int q = 0; q < 4; ++q) split.insert(BlockKey{0, 1, 0}.child(q));
  const auto fine = field_mesh(d, split, Representation::Level, 0.0, 0.0);
  redistribute(ps, *fine);
  const auto fine_keys = leaf_keys(*fine);
  for (std::size_t n = 0; n < ps.size(); ++n) {
    const BlockKey now = fine_keys[static_cast<std::size_t>(ps.particles[n].block)];
    const BoundingBox b = d.bnd_box(now);
    CHECK(b.contains_closed(ps.particles[n].posx, ps.particles[n].posy));
    if (before[n] == BlockKey{0, 1, 0}) {
      CHECK(now.parent() == before[n]);
    } else {
      CHECK(now == before[n]);
    }
  }
}

TEST_CASE("advection in still and uniform flow") {
  Rng rng(23);
  const Domain d = square(2, 1);
  const auto still = field_mesh(d, base_leaves(d), Representation::Octree, 0.0, 0.0);
  ParticleSet ps = random_particles(rng, d, 100);
  redistribute(ps, *still);
  const ParticleSet orig = ps;
  advect(ps, *still, 0.05);
  REQUIRE(ps.size() == orig.size());
  for (std::size_t n = 0; n < ps.size(); ++n) {
    CHECK(ps.particles[n].posx == orig.particles[n].posx);
    CHECK(ps.particles[n].posy == orig.particles[n].posy);
  }

  const auto wind = field_mesh(d, base_leaves(d), Representation::Level, 1.0, 0.0);
  ParticleSet moved = orig;
  redistribute(moved, *wind);
  advect(moved, *wind, 0.01);
  std::map<std::pair<std::int64_t, std::int64_t>, const Particle*> by_id;
  for (const auto& p : moved.particles) by_id[{p.cpu_id, p.tag}] = &p;
  for (const auto& p : orig.particles) {
    const bool stays = p.posx + 0.01 <= d.xhi;
    const auto it = by_id.find({p.cpu_id, p.tag});
    CHECK((it != by_id.end()) == stays);
    if (it == by_id.end()) continue;
    CHECK(it->second->posx == p.posx + 0.01);
    CHECK(it->second->posy == p.posy);
    CHECK(it->second->global_tag == p.global_tag);
    if (off_wall(d, 0, it->second->posx, it->second->posy)) {
      CHECK(it->second->ptemp == doctest::Approx(it->second->posx + 2.0 * it->second->posy).epsilon(1e-13));
    }
  }
}

TEST_CASE("outflow removes exactly the particles that leave") {
  Rng rng(29);
  const Domain d = square(2, 1);
  const auto wind = field_mesh(d, base_leaves(d), Representation::Octree, 1.0, -0.5);
  ParticleSet ps = random_particles(rng, d, 400);
  const ParticleSet orig = ps;
  redistribute(ps, *wind);
  advect(ps, *wind, 0.3);
  std::size_t expect = 0;
  for (const auto& p : orig.particles) {
    const double x = p.posx + 0.3, y = p.posy - 0.15;
    if (d.contains_point(x, y)) ++expect;
  }
  CHECK(ps.size() == expect);
  CHECK(ps.size() < orig.size());
  for (const auto& p : ps.particles) CHECK(d.contains_point(p.posx, p.posy));
  CHECK_NOTHROW(ps.check_identities());
}

TEST_CASE("canonical order and identity checks") {
  Rng rng(31);
  const Domain d = square(1, 0);
  ParticleSet ps = random_particles(rng, d, 50);
  std::shuffle(ps.particles.begin(), ps.particles.end(), rng);
  ps.sort_canonical();
  for (std::size_t n = 1; n < ps.size(); ++n) {
    const auto& a = ps.particles[n - 1];
    const auto& b = ps.particles[n];
    CHECK(std::pair{a.cpu_id, a.tag} < std::pair{b.cpu_id, b.tag});
  }
  ParticleSet dup = ps;
  dup.particles.push_back(ps.particles.front());
  CHECK_THROWS_AS(dup.check_identities(), InvariantError);
  ParticleSet stale = ps;
  stale.particles.front().global_tag += 1;
  CHECK_THROWS_AS(stale.check_identities(), InvariantError);
}

}  // TEST_SUITE
