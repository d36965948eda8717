#pragma once

#include <array>
#include <cstdint>

#include "amrckpt/mesh.hpp"

namespace amrckpt {

using CellValues = std::array<double, kNumVars>;

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return (a > 0.0) ? (a < b ? a : b) : (a > b ? a : b);
}

/// 4-cell mean in a fixed summation order (c00, c10 | c01, c11).
inline double restrict_quartet(double c00, double c10, double c01, double c11) {
  return ((c00 + c10) + (c01 + c11)) * 0.25;
}

/// Value of the in-domain cell (i, j) at `level`. Taken directly from the block
/// holding it when one exists at that level; otherwise prolonged from the next
/// coarser level with minmod-limited linear slopes (exact for linear fields).
/// Against the domain edge the slope is one-sided.
CellValues sample_cell(const MeshAccess& mesh, int level, std::int64_t i, std::int64_t j);

/// Fills the guard ring of `patch`, whose interior origin is global cell
/// (ilo, jlo) at `level`. Reads only interiors of the mesh's blocks.
void fill_patch_guards(const MeshAccess& mesh, PatchData& patch, int level, std::int64_t ilo,
                       std::int64_t jlo);

/// Second-derivative (Lohner) estimator of one variable at interior cell
/// (i, j) of a guard-filled patch; result lies in [0, 1].
double lohner_cell(const PatchData& patch, int var, int i, int j, double filter);

}  // namespace amrckpt
