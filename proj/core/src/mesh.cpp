#include "amrckpt/mesh.hpp"

#include <algorithm>

#include "amrckpt/errors.hpp"

namespace amrckpt {

void PatchData::fill(int var, double value) {
  const std::size_t plane = static_cast<std::size_t>(nx_ + 2) * (ny_ + 2);
  std::fill_n(data_.begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(var)), plane, value);
}

void RefineConfig::validate() const {
  if (!(refine_thresh > derefine_thresh)) {
    throw ConfigError("refine_thresh must exceed derefine_thresh");
  }
  if (filter < 0.0) throw ConfigError("refinement filter must be non-negative");
  if (vars.empty()) throw ConfigError("at least one refinement variable required");
  if (buffer_cells < 0 || buffer_cells > kNxb) throw ConfigError("buffer_cells must be in [0, 8]");
}

std::vector<BlockKey> leaf_keys(const MeshAccess& mesh) {
  std::vector<BlockKey> keys;
  for (const auto& leaf : mesh.leaves()) keys.push_back(leaf.key);
  return keys;
}

int finest_leaf_level(const MeshAccess& mesh) {
  int finest = 0;
  for (const auto& leaf : mesh.leaves()) finest = std::max(finest, leaf.key.level);
  return finest;
}

}  // namespace amrckpt
