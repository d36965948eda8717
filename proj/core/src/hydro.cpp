#include "amrckpt/hydro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "amrckpt/errors.hpp"

namespace amrckpt {

namespace {

using Cons = std::array<double, 4>;

constexpr int D = idx(Var::Dens);
constexpr int P = idx(Var::Pres);
constexpr int U = idx(Var::Velx);
constexpr int V = idx(Var::Vely);
constexpr int E = idx(Var::Ener);
constexpr int T = idx(Var::Temp);

// (level, direction, face index i, row/column j) at a coarse-fine interface.
using FaceKey = std::tuple<int, int, std::int64_t, std::int64_t>;

Cons physical_flux(int dir, double rho, double u, double v, double p, double e) {
  if (dir == 0) return {rho * u, rho * u * u + p, rho * u * v, (e + p) * u};
  return {rho * v, rho * v * u, rho * v * v + p, (e + p) * v};
}

Cons hll_flux(const PatchData& q, int dir, int il, int jl, int ir, int jr, double gamma) {
  const double rl = q.at(D, il, jl), ul = q.at(U, il, jl), vl = q.at(V, il, jl), pl = q.at(P, il, jl),
               el = q.at(E, il, jl);
  const double rr = q.at(D, ir, jr), ur = q.at(U, ir, jr), vr = q.at(V, ir, jr), pr = q.at(P, ir, jr),
               er = q.at(E, ir, jr);
  const double cl = std::sqrt(gamma * pl / rl);
  const double cr = std::sqrt(gamma * pr / rr);
  const double unl = dir == 0 ? ul : vl;
  const double unr = dir == 0 ? ur : vr;
  const double sl = std::min(unl - cl, unr - cr);
  const double sr = std::max(unl + cl, unr + cr);
  const Cons fl = physical_flux(dir, rl, ul, vl, pl, el);
  const Cons fr = physical_flux(dir, rr, ur, vr, pr, er);
  if (sl >= 0.0) return fl;
  if (sr <= 0.0) return fr;
  const Cons cons_l{rl, rl * ul, rl * vl, el};
  const Cons cons_r{rr, rr * ur, rr * vr, er};
  Cons f{};
  for (std::size_t k = 0; k < 4; ++k) {
    f[k] = (sr * fl[k] - sl * fr[k] + sl * sr * (cons_r[k] - cons_l[k])) / (sr - sl);
  }
  return f;
}

struct PatchFluxes {
  int nx = 0;
  std::vector<Cons> fx;  // (nx+1) faces per row, ny rows
  std::vector<Cons> fy;  // nx faces per row, ny+1 rows

  Cons& x(int i, int j) { return fx[static_cast<std::size_t>(j * (nx + 1) + i)]; }
  Cons& y(int i, int j) { return fy[static_cast<std::size_t>(j * nx + i)]; }
};

[[noreturn]] void positivity_failure(const Domain& d, int level, std::int64_t gi, std::int64_t gj, double dens,
                                     double pres) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "non-positive state at level %d cell (%lld, %lld), x=%.6g y=%.6g: dens=%.6g pres=%.6g",
                level, static_cast<long long>(gi), static_cast<long long>(gj), d.cell_center_x(level, gi),
                d.cell_center_y(level, gj), dens, pres);
  throw SolverError(buf);
}

bool bad(double x) { return !(x > 0.0) || !std::isfinite(x); }

// True when cell (gi, gj) of `level` exists in the domain and is overlaid by
// level+1.
bool refined_cell(const MeshAccess& mesh, int level, std::int64_t gi, std::int64_t gj) {
  if (!mesh.domain().contains_cell(level, gi, gj)) return false;
  return mesh.has_block(BlockKey{level + 1, (2 * gi) / kNxb, (2 * gj) / kNyb});
}

void stage(MeshAccess& mesh, std::vector<SolverPatch>& patches, const std::vector<PatchData>& u0, double dtfac,
           double gamma) {
  const Domain& d = mesh.domain();
  std::vector<PatchFluxes> flux(patches.size());

  for (std::size_t k = 0; k < patches.size(); ++k) {
    const PatchData& q = *patches[k].data;
    const int nx = q.nx(), ny = q.ny();
    PatchFluxes& f = flux[k];
    f.nx = nx;
    f.fx.resize(static_cast<std::size_t>((nx + 1) * ny));
    f.fy.resize(static_cast<std::size_t>(nx * (ny + 1)));
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i <= nx; ++i) f.x(i, j) = hll_flux(q, 0, i - 1, j, i, j, gamma);
    }
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i < nx; ++i) f.y(i, j) = hll_flux(q, 1, i, j - 1, i, j, gamma);
    }
  }

  // Fine-side fluxes on faces whose other side is a coarser leaf.
  std::map<FaceKey, Cons> fine;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const SolverPatch& sp = patches[k];
    const int L = sp.level;
    if (L == 0) continue;
    const int nx = sp.data->nx(), ny = sp.data->ny();
    auto absent = [&](std::int64_t gi, std::int64_t gj) {
      return d.contains_cell(L, gi, gj) && !mesh.has_block(BlockKey{L, gi / kNxb, gj / kNyb});
    };
    for (int j = 0; j < ny; ++j) {
      const std::int64_t gj = sp.jlo + j;
      if (!sp.is_covered(0, j) && absent(sp.ilo - 1, gj)) fine[{L, 0, sp.ilo, gj}] = flux[k].x(0, j);
      if (!sp.is_covered(nx - 1, j) && absent(sp.ilo + nx, gj)) fine[{L, 0, sp.ilo + nx, gj}] = flux[k].x(nx, j);
    }
    for (int i = 0; i < nx; ++i) {
      const std::int64_t gi = sp.ilo + i;
      if (!sp.is_covered(i, 0) && absent(gi, sp.jlo - 1)) fine[{L, 1, gi, sp.jlo}] = flux[k].y(i, 0);
      if (!sp.is_covered(i, ny - 1) && absent(gi, sp.jlo + ny)) fine[{L, 1, gi, sp.jlo + ny}] = flux[k].y(i, ny);
    }
  }

  // Coarse faces next to refined cells take the mean of the fine fluxes.
  for (std::size_t k = 0; k < patches.size(); ++k) {
    SolverPatch& sp = patches[k];
    const int L = sp.level;
    const int nx = sp.data->nx(), ny = sp.data->ny();
    auto covered = [&](int i, int j) {
      if (i >= 0 && i < nx && j >= 0 && j < ny) return sp.is_covered(i, j);
      return refined_cell(mesh, L, sp.ilo + i, sp.jlo + j);
    };
    const bool box = sp.covered != nullptr;
    auto correct = [&](Cons& f, int dir, std::int64_t fi, std::int64_t fj) {
      const Cons& a = fine.at({L + 1, dir, fi, fj});
      const Cons& b = fine.at({L + 1, dir, dir == 0 ? fi : fi + 1, dir == 0 ? fj + 1 : fj});
      for (std::size_t c = 0; c < 4; ++c) f[c] = (a[c] + b[c]) * 0.5;
    };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        if (!box && i != 0 && i != nx) continue;
        const bool cl = covered(i - 1, j);
        const bool cr = covered(i, j);
        if (cl == cr) continue;
        if ((cl && i == nx) || (cr && i == 0)) continue;
        correct(flux[k].x(i, j), 0, 2 * (sp.ilo + i), 2 * (sp.jlo + j));
      }
    }
    for (int j = 0; j <= ny; ++j) {
      if (!box && j != 0 && j != ny) continue;
      for (int i = 0; i < nx; ++i) {
        const bool cb = covered(i, j - 1);
        const bool ct = covered(i, j);
        if (cb == ct) continue;
        if ((cb && j == ny) || (ct && j == 0)) continue;
        correct(flux[k].y(i, j), 1, 2 * (sp.ilo + i), 2 * (sp.jlo + j));
      }
    }
  }

  for (std::size_t k = 0; k < patches.size(); ++k) {
    SolverPatch& sp = patches[k];
    PatchData& q = *sp.data;
    const PatchData& q0 = u0[k];
    const double dx = d.cell_width_x(sp.level);
    const double dy = d.cell_width_y(sp.level);
    PatchFluxes& f = flux[k];
    for (int j = 0; j < q.ny(); ++j) {
      for (int i = 0; i < q.nx(); ++i) {
        if (sp.is_covered(i, j)) continue;
        const double r0 = q0.at(D, i, j);
        const Cons c0{r0, r0 * q0.at(U, i, j), r0 * q0.at(V, i, j), q0.at(E, i, j)};
        Cons c{};
        for (std::size_t n = 0; n < 4; ++n) {
          const double du = -(f.x(i + 1, j)[n] - f.x(i, j)[n]) / dx - (f.y(i, j + 1)[n] - f.y(i, j)[n]) / dy;
          c[n] = c0[n] + dtfac * du;
        }
        q.at(D, i, j) = c[0];
        q.at(U, i, j) = c[1] / c[0];
        q.at(V, i, j) = c[2] / c[0];
        q.at(E, i, j) = c[3];
        finalize_cell(q, i, j, gamma);
        if (bad(q.at(D, i, j)) || bad(q.at(P, i, j))) {
          positivity_failure(d, sp.level, sp.ilo + i, sp.jlo + j, q.at(D, i, j), q.at(P, i, j));
        }
      }
    }
  }
  mesh.mark_modified();
}

template <typename Fn>
double leaf_sum(const MeshAccess& mesh, Fn&& cell_value) {
  const Domain& d = mesh.domain();
  double total = 0.0;
  for (const LeafRef& leaf : mesh.leaves()) {
    const double area = d.cell_width_x(leaf.key.level) * d.cell_width_y(leaf.key.level);
    double s = 0.0;
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) s += cell_value(leaf, i, j);
    }
    total += s * area;
  }
  return total;
}

}  // namespace

HydroState::HydroState(const HydroState& other)
    : mesh(other.mesh ? other.mesh->clone() : nullptr),
      time(other.time),
      dt(other.dt),
      step(other.step),
      gamma(other.gamma),
      cfl(other.cfl),
      refine(other.refine),
      refine_interval(other.refine_interval) {}

HydroState& HydroState::operator=(const HydroState& other) {
  if (this != &other) *this = HydroState(other);
  return *this;
}

double eos_pressure(double gamma, double dens, double velx, double vely, double ener) {
  return (gamma - 1.0) * (ener - 0.5 * dens * (velx * velx + vely * vely));
}

void finalize_cell(PatchData& p, int i, int j, double gamma) {
  const double pres = eos_pressure(gamma, p.at(D, i, j), p.at(U, i, j), p.at(V, i, j), p.at(E, i, j));
  p.at(P, i, j) = pres;
  p.at(T, i, j) = pres / p.at(D, i, j);
}

LeafFixup make_eos_fixup(double gamma) {
  return [gamma](PatchData& p) {
    for (int j = 0; j < p.ny(); ++j) {
      for (int i = 0; i < p.nx(); ++i) {
        const double rho = p.at(D, i, j), u = p.at(U, i, j), v = p.at(V, i, j);
        p.at(E, i, j) = p.at(P, i, j) / (gamma - 1.0) + 0.5 * rho * (u * u + v * v);
        finalize_cell(p, i, j, gamma);
      }
    }
  };
}

double compute_dt(const HydroState& state) {
  const MeshAccess& mesh = *state.mesh;
  const Domain& d = mesh.domain();
  double best = std::numeric_limits<double>::infinity();
  for (const LeafRef& leaf : mesh.leaves()) {
    const int L = leaf.key.level;
    const double h = std::min(d.cell_width_x(L), d.cell_width_y(L));
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        const double rho = leaf.value(D, i, j);
        const double p = leaf.value(P, i, j);
        if (bad(rho) || bad(p)) {
          positivity_failure(d, L, leaf.key.ix * kNxb + i, leaf.key.iy * kNyb + j, rho, p);
        }
        const double u = leaf.value(U, i, j), v = leaf.value(V, i, j);
        const double speed = std::sqrt(u * u + v * v) + std::sqrt(state.gamma * p / rho);
        best = std::min(best, h / speed);
      }
    }
  }
  return state.cfl * best;
}

void advance(HydroState& state, double dt) {
  if (!state.mesh) throw PreconditionError("hydro state has no mesh");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("timestep must be positive and finite");
  MeshAccess& mesh = *state.mesh;
  if (!mesh.guards_filled()) {
    mesh.restrict_to_parents();
    mesh.fill_guards();
  }

  std::vector<SolverPatch> patches = mesh.solver_patches();
  std::vector<PatchData> u0;
  u0.reserve(patches.size());
  for (const auto& sp : patches) u0.push_back(*sp.data);

  stage(mesh, patches, u0, 0.5 * dt, state.gamma);
  mesh.restrict_to_parents();
  mesh.fill_guards();
  stage(mesh, patches, u0, dt, state.gamma);
  mesh.restrict_to_parents();

  state.step += 1;
  state.time += dt;
  state.dt = dt;
  if (state.refine_interval > 0 && state.step % state.refine_interval == 0) {
    mesh.fill_guards();
    mesh.regrid(state.refine, make_eos_fixup(state.gamma));
    mesh.restrict_to_parents();
  }
  mesh.fill_guards();
}

double step(HydroState& state, double t_end) {
  double dt = compute_dt(state);
  if (t_end > state.time && state.time + dt > t_end) dt = t_end - state.time;
  advance(state, dt);
  return dt;
}

double total_mass(const MeshAccess& mesh) {
  return leaf_sum(mesh, [](const LeafRef& l, int i, int j) { return l.value(D, i, j); });
}

double total_energy(const MeshAccess& mesh) {
  return leaf_sum(mesh, [](const LeafRef& l, int i, int j) { return l.value(E, i, j); });
}

}  // namespace amrckpt
