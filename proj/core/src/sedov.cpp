#include "amrckpt/sedov.hpp"

#include <cmath>
#include <sstream>

#include "amrckpt/convert.hpp"
#include "amrckpt/errors.hpp"

namespace amrckpt {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool box_hits_disc(double x0, double x1, double y0, double y1, double cx, double cy, double r) {
  const double dx = std::max({x0 - cx, 0.0, cx - x1});
  const double dy = std::max({y0 - cy, 0.0, cy - y1});
  return dx * dx + dy * dy < r * r;
}

void set_ambient(PatchData& p, int i, int j, const SedovParams& prm, double pres) {
  p.at(Var::Dens, i, j) = prm.rho0;
  p.at(Var::Velx, i, j) = 0.0;
  p.at(Var::Vely, i, j) = 0.0;
  p.at(Var::Ener, i, j) = pres / (prm.gamma - 1.0);
  finalize_cell(p, i, j, prm.gamma);
}

// Ambient everywhere, with a pressure jump on every cell touching the disc.
void mark_blast(MeshAccess& mesh, const SedovParams& prm, double r0, double p_blast) {
  const Domain& d = mesh.domain();
  const double cx = 0.5 * (d.xlo + d.xhi);
  const double cy = 0.5 * (d.ylo + d.yhi);
  for (SolverPatch& sp : mesh.solver_patches()) {
    const double hx = d.cell_width_x(sp.level);
    const double hy = d.cell_width_y(sp.level);
    for (int j = 0; j < sp.data->ny(); ++j) {
      for (int i = 0; i < sp.data->nx(); ++i) {
        const double x0 = d.xlo + static_cast<double>(sp.ilo + i) * hx;
        const double y0 = d.ylo + static_cast<double>(sp.jlo + j) * hy;
        const bool hit = box_hits_disc(x0, x0 + hx, y0, y0 + hy, cx, cy, r0);
        set_ambient(*sp.data, i, j, prm, hit ? p_blast : prm.ambient_pressure());
      }
    }
  }
  mesh.mark_modified();
  mesh.restrict_to_parents();
  mesh.fill_guards();
}

}  // namespace

void SedovParams::validate() const {
  std::ostringstream msg;
  if (!(gamma > 1.0)) msg << "gamma must exceed 1; ";
  if (!(rho0 > 0.0)) msg << "rho0 must be positive; ";
  if (!(ambient_pressure() > 0.0)) msg << "p0 must be positive; ";
  if (!(E0 >= 0.0)) msg << "E0 must be non-negative; ";
  if (!(r0 >= 0.0)) msg << "r0 must be non-negative; ";
  if (!(cfl > 0.0 && cfl < 1.0)) msg << "cfl must lie in (0, 1); ";
  if (!(t_end >= 0.0)) msg << "t_end must be non-negative; ";
  const std::string problems = msg.str();
  if (!problems.empty()) throw ConfigError("invalid Sedov parameters: " + problems);
}

double sedov_radius(const Domain& domain, const SedovParams& params) {
  const double h = std::min(domain.cell_width_x(domain.max_level), domain.cell_width_y(domain.max_level));
  const double r0 = params.r0 == 0.0 ? 3.0 * h : params.r0;
  if (r0 < h) {
    throw ConfigError("deposition radius " + std::to_string(r0) + " is smaller than one finest cell (" +
                      std::to_string(h) + ")");
  }
  return r0;
}

Domain default_sedov_domain() {
  Domain d;
  d.base_nx = 8;
  d.base_ny = 8;
  d.max_level = 3;
  return d;
}

HydroState init_sedov(const Domain& domain, const SedovParams& params, Representation rep,
                      const RefineConfig& refine, int refine_interval) {
  params.validate();
  refine.validate();
  if (refine_interval < 0) throw ConfigError("refine_interval must be non-negative");
  const double r0 = sedov_radius(domain, params);

  HydroState st(mesh_from_leaves(domain, [&] {
    std::map<BlockKey, PatchData> leaves;
    for (std::int64_t iy = 0; iy < domain.base_ny; ++iy) {
      for (std::int64_t ix = 0; ix < domain.base_nx; ++ix) leaves.emplace(BlockKey{0, ix, iy}, PatchData(kNxb, kNyb));
    }
    return leaves;
  }(), rep));
  st.gamma = params.gamma;
  st.cfl = params.cfl;
  st.refine = refine;
  st.refine_interval = refine_interval;
  MeshAccess& mesh = *st.mesh;

  if (params.E0 > 0.0) {
    const double p_blast = (params.gamma - 1.0) * params.E0 / (kPi * r0 * r0);
    const LeafFixup fixup = make_eos_fixup(params.gamma);
    const int max_rounds = 4 * (domain.max_level + 1) + 4;
    for (int round = 0;; ++round) {
      if (round == max_rounds) throw InvariantError("Sedov pre-refinement did not converge");
      mark_blast(mesh, params, r0, p_blast);
      const auto before = leaf_keys(mesh);
      mesh.regrid(refine, fixup);
      if (leaf_keys(mesh) == before) break;
    }
  }

  const Domain& d = mesh.domain();
  const double cx = 0.5 * (d.xlo + d.xhi);
  const double cy = 0.5 * (d.ylo + d.yhi);
  auto inside = [&](int level, std::int64_t gi, std::int64_t gj) {
    const double x = d.cell_center_x(level, gi) - cx;
    const double y = d.cell_center_y(level, gj) - cy;
    return x * x + y * y <= r0 * r0;
  };

  auto patches = mesh.solver_patches();
  double v_in = 0.0;
  for (const SolverPatch& sp : patches) {
    const double area = d.cell_width_x(sp.level) * d.cell_width_y(sp.level);
    for (int j = 0; j < sp.data->ny(); ++j) {
      for (int i = 0; i < sp.data->nx(); ++i) {
        if (!sp.is_covered(i, j) && inside(sp.level, sp.ilo + i, sp.jlo + j)) v_in += area;
      }
    }
  }
  if (params.E0 > 0.0 && !(v_in > 0.0)) {
    throw ConfigError("deposition radius covers no cell centers on the refined mesh");
  }
  const double e_amb = params.ambient_pressure() / (params.gamma - 1.0);
  for (SolverPatch& sp : patches) {
    for (int j = 0; j < sp.data->ny(); ++j) {
      for (int i = 0; i < sp.data->nx(); ++i) {
        set_ambient(*sp.data, i, j, params, params.ambient_pressure());
        if (params.E0 > 0.0 && !sp.is_covered(i, j) && inside(sp.level, sp.ilo + i, sp.jlo + j)) {
          sp.data->at(Var::Ener, i, j) = e_amb + params.E0 / v_in;
          finalize_cell(*sp.data, i, j, params.gamma);
        }
      }
    }
  }
  mesh.mark_modified();
  mesh.restrict_to_parents();
  mesh.fill_guards();
  return st;
}

}  // namespace amrckpt
