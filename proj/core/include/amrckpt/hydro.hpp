#pragma once

#include <cstdint>
#include <memory>

#include "amrckpt/mesh.hpp"

namespace amrckpt {

/// Solver state of the 2D Euler equations on either mesh representation.
/// Between steps every cell stores dens, velx, vely, ener as primary values
/// and pres, temp derived from them; parents are restricted and guards filled.
class HydroState {
 public:
  HydroState() = default;
  HydroState(std::unique_ptr<MeshAccess> m) : mesh(std::move(m)) {}
  HydroState(const HydroState& other);
  HydroState& operator=(const HydroState& other);
  HydroState(HydroState&&) noexcept = default;
  HydroState& operator=(HydroState&&) noexcept = default;

  std::unique_ptr<MeshAccess> mesh;
  double time = 0.0;
  /// Last timestep taken.
  double dt = 0.0;
  std::int64_t step = 0;
  double gamma = 1.4;
  double cfl = 0.4;
  RefineConfig refine;
  /// Regrid after every refine_interval-th step; 0 freezes the mesh.
  int refine_interval = 2;
};

/// (γ-1)(ener - kinetic), the pressure implied by the stored primaries.
double eos_pressure(double gamma, double dens, double velx, double vely, double ener);

/// Recomputes pres and temp of one cell from dens, velx, vely, ener.
void finalize_cell(PatchData& p, int i, int j, double gamma);

/// Fixup for interpolated blocks: ener and temp from the interpolated
/// (dens, velx, vely, pres), then pres recomputed from the primaries.
LeafFixup make_eos_fixup(double gamma);

/// cfl * min over leaf cells of min(dx, dy) / (|v| + c). Throws SolverError
/// for non-positive density or pressure.
double compute_dt(const HydroState& state);

/// One midpoint-RK2 step of size dt with HLL fluxes and coarse-fine flux
/// correction, followed by regridding (every refine_interval steps),
/// restriction and guard filling. Throws SolverError with the offending cell
/// coordinates when density or pressure become non-positive.
void advance(HydroState& state, double dt);

/// advance() with dt = compute_dt(state), clipped so time does not pass t_end
/// when t_end > time.
double step(HydroState& state, double t_end = 0.0);

/// Sum over leaf cells of dens * cell area.
double total_mass(const MeshAccess& mesh);
/// Sum over leaf cells of ener * cell area.
double total_energy(const MeshAccess& mesh);

}  // namespace amrckpt
