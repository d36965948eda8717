#include "amrckpt/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amrckpt/errors.hpp"

namespace amrckpt {

CellValues sample_cell(const MeshAccess& mesh, int level, std::int64_t i, std::int64_t j) {
  CellValues out{};
  if (const auto cell = mesh.locate(level, i, j)) {
    for (int v = 0; v < kNumVars; ++v) out[static_cast<std::size_t>(v)] = cell->patch->at(v, cell->i, cell->j);
    return out;
  }
  if (level == 0) {
    throw InvariantError("no block covers level-0 cell (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  }

  const Domain& d = mesh.domain();
  const int lc = level - 1;
  const std::int64_t ic = i >> 1;
  const std::int64_t jc = j >> 1;
  const CellValues c = sample_cell(mesh, lc, ic, jc);
  const bool has_w = ic > 0;
  const bool has_e = ic + 1 < d.ncells_x(lc);
  const bool has_s = jc > 0;
  const bool has_n = jc + 1 < d.ncells_y(lc);
  const CellValues w = has_w ? sample_cell(mesh, lc, ic - 1, jc) : c;
  const CellValues e = has_e ? sample_cell(mesh, lc, ic + 1, jc) : c;
  const CellValues s = has_s ? sample_cell(mesh, lc, ic, jc - 1) : c;
  const CellValues n = has_n ? sample_cell(mesh, lc, ic, jc + 1) : c;

  // One-sided slope against the domain edge keeps linear data exact there.
  auto slope = [](bool lo, bool hi, double m, double c0, double p) {
    if (lo && hi) return minmod(p - c0, c0 - m);
    if (hi) return p - c0;
    if (lo) return c0 - m;
    return 0.0;
  };
  const double ox = (i & 1) ? 0.25 : -0.25;
  const double oy = (j & 1) ? 0.25 : -0.25;
  for (std::size_t v = 0; v < out.size(); ++v) {
    const double sx = slope(has_w, has_e, w[v], c[v], e[v]);
    const double sy = slope(has_s, has_n, s[v], c[v], n[v]);
    out[v] = c[v] + ox * sx + oy * sy;
  }
  return out;
}

void fill_patch_guards(const MeshAccess& mesh, PatchData& patch, int level, std::int64_t ilo,
                       std::int64_t jlo) {
  const Domain& d = mesh.domain();
  const int nx = patch.nx();
  const int ny = patch.ny();
  const std::int64_t ncx = d.ncells_x(level);
  const std::int64_t ncy = d.ncells_y(level);
  const int nvar = patch.nvar();

  auto fill_one = [&](int li, int lj) {
    const std::int64_t ci = std::clamp<std::int64_t>(ilo + li, 0, ncx - 1);
    const std::int64_t cj = std::clamp<std::int64_t>(jlo + lj, 0, ncy - 1);
    const auto si = static_cast<int>(ci - ilo);
    const auto sj = static_cast<int>(cj - jlo);
    if (si >= 0 && si < nx && sj >= 0 && sj < ny) {
      for (int v = 0; v < nvar; ++v) patch.at(v, li, lj) = patch.at(v, si, sj);
      return;
    }
    const CellValues vals = sample_cell(mesh, level, ci, cj);
    for (int v = 0; v < nvar; ++v) patch.at(v, li, lj) = vals[static_cast<std::size_t>(v)];
  };

  for (int li = -1; li <= nx; ++li) {
    fill_one(li, -1);
    fill_one(li, ny);
  }
  for (int lj = 0; lj < ny; ++lj) {
    fill_one(-1, lj);
    fill_one(nx, lj);
  }
}

double lohner_cell(const PatchData& p, int var, int i, int j, double filter) {
  double num2 = 0.0;
  double den2 = 0.0;
  auto accumulate = [&](double um, double u0, double up) {
    const double num = std::abs(up - 2.0 * u0 + um);
    const double den =
        std::abs(up - u0) + std::abs(u0 - um) + filter * (std::abs(up) + 2.0 * std::abs(u0) + std::abs(um));
    num2 += num * num;
    den2 += den * den;
  };
  accumulate(p.at(var, i - 1, j), p.at(var, i, j), p.at(var, i + 1, j));
  accumulate(p.at(var, i, j - 1), p.at(var, i, j), p.at(var, i, j + 1));
  if (den2 <= 0.0) return 0.0;
  return std::min(1.0, std::sqrt(num2 / den2));
}

}  // namespace amrckpt
