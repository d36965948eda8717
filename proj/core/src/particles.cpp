#include "amrckpt/particles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "amrckpt/errors.hpp"

namespace amrckpt {

namespace {

struct LeafLookup {
  std::unordered_map<BlockKey, std::pair<LeafRef, int>, BlockKeyHash> by_key;

  explicit LeafLookup(const MeshAccess& mesh) {
    const auto leaves = mesh.leaves();
    by_key.reserve(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) by_key.emplace(leaves[i].key, std::make_pair(leaves[i], static_cast<int>(i)));
  }
};

std::optional<BlockKey> find_leaf_opt(const MeshAccess& mesh, double x, double y) {
  const Domain& d = mesh.domain();
  std::optional<BlockKey> best;
  std::uint64_t best_key = 0;
  for (int level = 0; level <= d.max_level; ++level) {
    const auto kx = static_cast<std::int64_t>(std::floor((x - d.xlo) / d.block_width_x(level)));
    const auto ky = static_cast<std::int64_t>(std::floor((y - d.ylo) / d.block_width_y(level)));
    for (std::int64_t iy = ky - 1; iy <= ky + 1; ++iy) {
      for (std::int64_t ix = kx - 1; ix <= kx + 1; ++ix) {
        const BlockKey k{level, ix, iy};
        if (!d.contains_block(k) || !mesh.is_leaf(k)) continue;
        if (!d.bnd_box(k).contains_closed(x, y)) continue;
        const std::uint64_t sk = sfc_key(k);
        if (!best || sk > best_key) {
          best = k;
          best_key = sk;
        }
      }
    }
  }
  return best;
}

[[noreturn]] void no_owner(double x, double y) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "no leaf block contains position (%.17g, %.17g)", x, y);
  throw OwnershipError(buf);
}

double lerp(double a, double b, double w) { return a + w * (b - a); }

double interpolate(const Domain& d, const LeafRef& leaf, int var, double x, double y) {
  const BoundingBox box = d.bnd_box(leaf.key);
  const double sx = (x - box.lo[0]) / d.cell_width_x(leaf.key.level) - 0.5;
  const double sy = (y - box.lo[1]) / d.cell_width_y(leaf.key.level) - 0.5;
  const int i0 = std::clamp(static_cast<int>(std::floor(sx)), -1, kNxb - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor(sy)), -1, kNyb - 1);
  const double wx = sx - i0;
  const double wy = sy - j0;
  const double f00 = leaf.value(var, i0, j0);
  const double f10 = leaf.value(var, i0 + 1, j0);
  const double f01 = leaf.value(var, i0, j0 + 1);
  const double f11 = leaf.value(var, i0 + 1, j0 + 1);
  return lerp(lerp(f00, f10, wx), lerp(f01, f11, wx), wy);
}

const std::pair<LeafRef, int>& owner(const MeshAccess& mesh, const LeafLookup& lookup, double x, double y) {
  const auto key = find_leaf_opt(mesh, x, y);
  if (!key) no_owner(x, y);
  return lookup.by_key.at(*key);
}

void require_guards(const MeshAccess& mesh) {
  if (!mesh.guards_filled()) throw PreconditionError("particle interpolation requires filled guard cells");
}

}  // namespace

void ParticleSet::sort_canonical() {
  std::sort(particles.begin(), particles.end(), [](const Particle& a, const Particle& b) {
    return a.cpu_id != b.cpu_id ? a.cpu_id < b.cpu_id : a.tag < b.tag;
  });
}

void ParticleSet::check_identities() const {
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& p : particles) {
    if (!seen.emplace(p.cpu_id, p.tag).second) {
      throw InvariantError("duplicate particle identity (" + std::to_string(p.cpu_id) + ", " + std::to_string(p.tag) + ")");
    }
    if (p.global_tag != encode_identity(p.cpu_id, p.tag)) throw InvariantError("particle global_tag out of date");
  }
}

std::uint64_t encode_identity(std::int64_t cpu_id, std::int64_t tag) {
  if (cpu_id < 0 || cpu_id >= kMaxCpuId) {
    throw IdentityOverflowError("cpu_id " + std::to_string(cpu_id) + " outside [0, 2^24)");
  }
  if (tag < 1 || tag >= kMaxTag) throw IdentityOverflowError("tag " + std::to_string(tag) + " outside [1, 2^40)");
  return (static_cast<std::uint64_t>(cpu_id) << kTagBits) | static_cast<std::uint64_t>(tag);
}

std::pair<std::int64_t, std::int64_t> decode_identity(std::uint64_t global_tag) {
  return {static_cast<std::int64_t>(global_tag >> kTagBits),
          static_cast<std::int64_t>(global_tag & (static_cast<std::uint64_t>(kMaxTag) - 1))};
}

ParticleSet init_particles(int nx, int ny, const MeshAccess& mesh, const RankAssignment& ranks) {
  if (nx < 1 || ny < 1) throw ConfigError("particle lattice must be at least 1x1");
  const Domain& d = mesh.domain();
  const double hx = (d.xhi - d.xlo) / nx;
  const double hy = (d.yhi - d.ylo) / ny;
  std::vector<std::int64_t> next_tag(static_cast<std::size_t>(ranks.nranks), 1);
  ParticleSet ps;
  ps.particles.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Particle p;
      p.posx = d.xlo + (i + 0.5) * hx;
      p.posy = d.ylo + (j + 0.5) * hy;
      const auto key = find_leaf_opt(mesh, p.posx, p.posy);
      if (!key) no_owner(p.posx, p.posy);
      const int rank = ranks.rank_of(*key);
      p.cpu_id = rank;
      p.tag = next_tag[static_cast<std::size_t>(rank)]++;
      p.global_tag = encode_identity(p.cpu_id, p.tag);
      ps.particles.push_back(p);
    }
  }
  ps.sort_canonical();
  interpolate_fields(ps, mesh);
  return ps;
}

BlockKey find_leaf(const MeshAccess& mesh, double x, double y) {
  const auto key = find_leaf_opt(mesh, x, y);
  if (!key) no_owner(x, y);
  return *key;
}

double sample_field(const MeshAccess& mesh, Var var, double x, double y) {
  require_guards(mesh);
  const LeafLookup lookup(mesh);
  return interpolate(mesh.domain(), owner(mesh, lookup, x, y).first, idx(var), x, y);
}

void redistribute(ParticleSet& ps, const MeshAccess& mesh) {
  const LeafLookup lookup(mesh);
  for (auto& p : ps.particles) p.block = owner(mesh, lookup, p.posx, p.posy).second;
}

void interpolate_fields(ParticleSet& ps, const MeshAccess& mesh) {
  require_guards(mesh);
  const LeafLookup lookup(mesh);
  const Domain& d = mesh.domain();
  for (auto& p : ps.particles) {
    const auto& [leaf, index] = owner(mesh, lookup, p.posx, p.posy);
    p.block = index;
    p.ptemp = interpolate(d, leaf, idx(Var::Temp), p.posx, p.posy);
    p.pdens = interpolate(d, leaf, idx(Var::Dens), p.posx, p.posy);
  }
}

void advect_positions(ParticleSet& ps, const MeshAccess& mesh, double dt) {
  require_guards(mesh);
  const LeafLookup lookup(mesh);
  const Domain& d = mesh.domain();
  std::vector<Particle> kept;
  kept.reserve(ps.particles.size());
  for (auto p : ps.particles) {
    const LeafRef& l0 = owner(mesh, lookup, p.posx, p.posy).first;
    const double u0 = interpolate(d, l0, idx(Var::Velx), p.posx, p.posy);
    const double v0 = interpolate(d, l0, idx(Var::Vely), p.posx, p.posy);
    const double xm = std::clamp(p.posx + 0.5 * dt * u0, d.xlo, d.xhi);
    const double ym = std::clamp(p.posy + 0.5 * dt * v0, d.ylo, d.yhi);
    const LeafRef& lm = owner(mesh, lookup, xm, ym).first;
    const double um = interpolate(d, lm, idx(Var::Velx), xm, ym);
    const double vm = interpolate(d, lm, idx(Var::Vely), xm, ym);
    p.posx += dt * um;
    p.posy += dt * vm;
    if (d.contains_point(p.posx, p.posy)) kept.push_back(p);
  }
  ps.particles = std::move(kept);
}

void advect(ParticleSet& ps, const MeshAccess& mesh, double dt) {
  advect_positions(ps, mesh, dt);
  interpolate_fields(ps, mesh);
}

}  // namespace amrckpt
