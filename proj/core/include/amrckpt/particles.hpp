#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "amrckpt/mesh.hpp"
#include "amrckpt/partition.hpp"

namespace amrckpt {

inline constexpr int kTagBits = 40;
inline constexpr std::int64_t kMaxCpuId = std::int64_t{1} << 24;
inline constexpr std::int64_t kMaxTag = std::int64_t{1} << kTagBits;

/// Massless tracer. (cpu_id, tag) is the identity written to checkpoints;
/// cpu_id is the virtual rank that created the particle and never changes.
struct Particle {
  std::int64_t cpu_id = 0;
  std::int64_t tag = 0;
  std::uint64_t global_tag = 0;
  double posx = 0.0;
  double posy = 0.0;
  double ptemp = 0.0;
  double pdens = 0.0;
  /// Canonical index of the owning leaf; not checkpointed.
  int block = -1;
};

struct ParticleSet {
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }
  /// Sorts by (cpu_id, tag).
  void sort_canonical();
  /// Throws InvariantError on duplicate identities or a stale global_tag.
  void check_identities() const;
};

/// cpu_id * 2^40 + tag. Throws IdentityOverflowError outside
/// 0 <= cpu_id < 2^24, 1 <= tag < 2^40.
std::uint64_t encode_identity(std::int64_t cpu_id, std::int64_t tag);
std::pair<std::int64_t, std::int64_t> decode_identity(std::uint64_t global_tag);

/// nx*ny particles at the cell centers of a uniform nx*ny lattice over the
/// domain, created row-major. cpu_id is the rank owning the birth leaf and
/// tags count from 1 within each rank. Fields are interpolated.
ParticleSet init_particles(int nx, int ny, const MeshAccess& mesh, const RankAssignment& ranks);

/// Leaf whose closed bounding box contains (x, y); on block faces the leaf
/// with the larger sfc key wins. Throws OwnershipError when none does.
BlockKey find_leaf(const MeshAccess& mesh, double x, double y);

/// Bilinear value of `var` at (x, y) from the owning leaf's cells and guards.
/// Requires filled guards.
double sample_field(const MeshAccess& mesh, Var var, double x, double y);

/// Assigns every particle its owning leaf.
void redistribute(ParticleSet& ps, const MeshAccess& mesh);

/// Sets ptemp and pdens from temp and dens at each particle position.
void interpolate_fields(ParticleSet& ps, const MeshAccess& mesh);

/// Midpoint update of positions in the (velx, vely) field over dt. Particles
/// that end strictly outside the domain are removed; survivors are
/// redistributed and their fields re-interpolated.
void advect(ParticleSet& ps, const MeshAccess& mesh, double dt);

/// Positions only, without the final redistribution and interpolation.
void advect_positions(ParticleSet& ps, const MeshAccess& mesh, double dt);

}  // namespace amrckpt
