#include "amrckpt/restart.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "amrckpt/convert.hpp"
#include "amrckpt/errors.hpp"

namespace amrckpt {

std::unique_ptr<MeshAccess> mesh_from_snapshot(const CheckpointSnapshot& snap, Representation target) {
  snap.check_shapes();
  if (snap.varnames.size() != kVarNames.size() ||
      !std::equal(snap.varnames.begin(), snap.varnames.end(), kVarNames.begin())) {
    throw RestartError("checkpoint variables do not match the solver's dens, pres, velx, vely, ener, temp");
  }
  const auto keys = snap.block_keys();
  std::map<BlockKey, PatchData> leaves;
  for (std::size_t b = 0; b < keys.size(); ++b) {
    PatchData pd(kNxb, kNyb);
    for (int v = 0; v < kNumVars; ++v) {
      const double* src = snap.unknowns[static_cast<std::size_t>(v)].data() + b * kCellsPerBlock;
      for (int j = 0; j < kNyb; ++j) {
        for (int i = 0; i < kNxb; ++i) pd.at(v, i, j) = src[j * kNxb + i];
      }
    }
    if (!leaves.emplace(keys[b], std::move(pd)).second) {
      throw RestartError("checkpoint lists block (level " + std::to_string(keys[b].level) + ", " +
                         std::to_string(keys[b].ix) + ", " + std::to_string(keys[b].iy) + ") twice");
    }
  }
  return mesh_from_leaves(snap.domain, std::move(leaves), target);
}

ParticleSet particles_from_snapshot(const CheckpointSnapshot& snap, const MeshAccess& mesh) {
  const Domain& d = mesh.domain();
  ParticleSet ps;
  ps.particles.reserve(snap.nparticles());
  for (std::size_t k = 0; k < snap.nparticles(); ++k) {
    Particle p;
    p.cpu_id = snap.cpu[k];
    p.tag = snap.tag[k];
    try {
      p.global_tag = encode_identity(p.cpu_id, p.tag);
    } catch (const IdentityOverflowError& e) {
      throw RestartError("particle " + std::to_string(k) + ": " + e.what());
    }
    p.posx = snap.posx[k];
    p.posy = snap.posy[k];
    p.ptemp = snap.ptemp[k];
    p.pdens = snap.pdens[k];
    if (!d.contains_point(p.posx, p.posy)) {
      throw RestartError("particle (" + std::to_string(p.cpu_id) + ", " + std::to_string(p.tag) +
                         ") lies outside the restored domain");
    }
    ps.particles.push_back(p);
  }
  ps.sort_canonical();
  try {
    ps.check_identities();
  } catch (const InvariantError& e) {
    throw RestartError(e.what());
  }
  redistribute(ps, mesh);
  return ps;
}

RestartResult restore(const CheckpointSnapshot& snap, const RestartRequest& req) {
  RestartResult out;
  out.state.mesh = mesh_from_snapshot(snap, req.target_rep);
  out.state.time = snap.time;
  out.state.dt = snap.dt;
  out.state.step = snap.step;
  out.state.gamma = snap.gamma;
  out.state.cfl = req.cfl.value_or(snap.cfl);
  out.state.refine = req.refine.value_or(snap.refine);
  out.state.refine_interval = req.refine_interval.value_or(static_cast<int>(snap.refine_interval));
  out.state.refine.validate();
  out.particles = particles_from_snapshot(snap, *out.state.mesh);
  out.checkpoint_number = snap.checkpoint_number;
  out.source_rep = snap.source_rep;
  return out;
}

RestartResult restart_from(const RestartRequest& req) { return restore(read_checkpoint(req.path), req); }

CheckpointSnapshot convert_snapshot(const CheckpointSnapshot& snap, Representation target) {
  RestartRequest req;
  req.target_rep = target;
  const RestartResult r = restore(snap, req);
  SnapshotMeta meta;
  meta.checkpoint_number = snap.checkpoint_number;
  return snapshot_of(r.state, r.particles, meta);
}

}  // namespace amrckpt
