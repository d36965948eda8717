#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amrckpt/geometry.hpp"

namespace amrckpt {

/// Cell-centered storage for a rectangular patch of nx*ny interior cells plus
/// one guard layer on every side, for all variables. Valid indices run from
/// -1 to nx (resp. ny) inclusive; 0..nx-1 is the interior.
class PatchData {
 public:
  PatchData() = default;
  PatchData(int nx, int ny, int nvar = kNumVars)
      : nx_(nx), ny_(ny), nvar_(nvar),
        data_(static_cast<std::size_t>(nvar) * (nx + 2) * (ny + 2), 0.0) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nvar() const { return nvar_; }

  double& at(int var, int i, int j) { return data_[offset(var, i, j)]; }
  double at(int var, int i, int j) const { return data_[offset(var, i, j)]; }
  double& at(Var var, int i, int j) { return at(idx(var), i, j); }
  double at(Var var, int i, int j) const { return at(idx(var), i, j); }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  /// Sets every interior and guard value of one variable.
  void fill(int var, double value);

 private:
  std::size_t offset(int var, int i, int j) const {
    return (static_cast<std::size_t>(var) * (ny_ + 2) + static_cast<std::size_t>(j + 1)) * (nx_ + 2) +
           static_cast<std::size_t>(i + 1);
  }

  int nx_ = 0;
  int ny_ = 0;
  int nvar_ = 0;
  std::vector<double> data_;
};

}  // namespace amrckpt
