#pragma once

#include <optional>

#include "amrckpt/hydro.hpp"

namespace amrckpt {

struct SedovParams {
  double gamma = 1.4;
  double E0 = 1.0;
  /// Deposition radius; 0 selects three finest cells.
  double r0 = 0.0;
  double rho0 = 1.0;
  /// Ambient pressure; unset means 1e-5 * (gamma - 1).
  std::optional<double> p0;
  double cfl = 0.4;
  double t_end = 0.05;

  double ambient_pressure() const { return p0 ? *p0 : 1e-5 * (gamma - 1.0); }
  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

/// Deposition radius actually used on `domain`.
double sedov_radius(const Domain& domain, const SedovParams& params);

/// Ambient gas with E0 deposited as internal energy in the cells whose
/// centers lie within r0 of the domain center. The mesh is pre-refined with
/// the representation's own regrid until the leaf set stops changing.
HydroState init_sedov(const Domain& domain, const SedovParams& params, Representation rep,
                      const RefineConfig& refine = {}, int refine_interval = 2);

/// The default desk-scale domain: [0,1]^2, 8x8 base blocks, max_level 3.
Domain default_sedov_domain();

}  // namespace amrckpt
