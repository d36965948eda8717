#pragma once

// Generators and helpers shared by the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "amrckpt/checkpoint.hpp"
#include "amrckpt/octree_mesh.hpp"
#include "amrckpt/run.hpp"

namespace amrckpt::testing {

using Rng = std::mt19937_64;

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "amrckpt");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);

Domain random_domain(Rng& rng, int max_base = 3, int max_level = 3);

/// Random splits of the level-0 grid, then 2:1 balanced.
LeafSet random_leaf_set(Rng& rng, const Domain& domain, double split_prob = 0.35);

/// Leaf data with positive dens, pres, ener and temp.
std::map<BlockKey, PatchData> random_leaf_data(Rng& rng, const LeafSet& leaves);

/// Balanced random mesh of the given representation, guards filled.
std::unique_ptr<MeshAccess> random_mesh(Rng& rng, const Domain& domain, Representation rep);

/// Random particles inside the domain with unique identities.
ParticleSet random_particles(Rng& rng, const Domain& domain, int count);

/// Snapshot of a random mesh and particle set. Values include signed zeros,
/// subnormals and extreme magnitudes.
CheckpointSnapshot random_snapshot(Rng& rng);

/// Field-by-field equality of the stored bit patterns.
bool same_bits(const CheckpointSnapshot& a, const CheckpointSnapshot& b);

/// Small, fast Sedov train used by the integration tests.
RunConfig small_config(const std::string& out_dir, Representation rep = Representation::Octree);

/// Field values f(x, y) = a + b*x + c*y stored in every variable, with dyadic
/// coefficients so that prolongation reproduces them exactly.
double linear_field(int var, double x, double y);

}  // namespace amrckpt::testing
