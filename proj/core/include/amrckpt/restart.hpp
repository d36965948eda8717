#pragma once

#include <optional>
#include <string>

#include "amrckpt/checkpoint.hpp"

namespace amrckpt {

struct RestartRequest {
  std::string path;
  Representation target_rep = Representation::Octree;
  std::optional<RefineConfig> refine;
  std::optional<int> refine_interval;
  std::optional<double> cfl;
};

struct RestartResult {
  HydroState state;
  ParticleSet particles;
  std::int64_t checkpoint_number = 0;
  Representation source_rep = Representation::Octree;
};

/// Leaf blocks of `snap` as a mesh of the requested representation, parents
/// restricted and guards filled. Throws RestartError for variable sets other
/// than the solver's.
std::unique_ptr<MeshAccess> mesh_from_snapshot(const CheckpointSnapshot& snap, Representation target);

/// Particles with their stored identities and field values, assigned to
/// leaves of `mesh`. Throws RestartError for particles outside the domain or
/// with invalid identities.
ParticleSet particles_from_snapshot(const CheckpointSnapshot& snap, const MeshAccess& mesh);

RestartResult restore(const CheckpointSnapshot& snap, const RestartRequest& req);

/// Reads req.path and restores it under req.target_rep, whatever
/// representation wrote it.
RestartResult restart_from(const RestartRequest& req);

/// The same checkpoint as produced by a run in `target`.
CheckpointSnapshot convert_snapshot(const CheckpointSnapshot& snap, Representation target);

}  // namespace amrckpt
