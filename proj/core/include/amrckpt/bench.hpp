#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amrckpt/checkpoint.hpp"

namespace amrckpt {

inline constexpr int kWeakBlocksPerRank = 18;
inline constexpr int kStrongBlocksPerAxis = 46;
inline constexpr int kStrongParticlesPerAxis = 24;

struct BenchRow {
  int ranks = 1;
  std::int64_t blocks = 0;
  std::int64_t particles = 0;
  std::uint64_t file_bytes = 0;
  double t_particles_s = 0.0;
  double t_checkpoint_s = 0.0;
  /// FNV-1a of the written file.
  std::uint64_t checksum = 0;
  std::string path;
};

/// Near-square (nx, ny) with nx * ny == blocks and nx <= ny.
std::pair<int, int> block_grid(std::int64_t blocks);

/// Uniform, refinement-frozen Sedov checkpoint on an nx x ny base grid with
/// a px x py particle lattice, spread over `ranks` virtual ranks.
CheckpointSnapshot static_snapshot(int nx, int ny, int px, int py, int ranks);

/// One file per rank count with blocks_per_rank * R blocks and 2x2
/// particles per block.
std::vector<BenchRow> bench_weak(const std::vector<int>& ranks, const std::string& out_dir,
                                 int blocks_per_rank = kWeakBlocksPerRank);
/// The same snapshot written with every rank count.
std::vector<BenchRow> bench_strong(const std::vector<int>& ranks, const std::string& out_dir,
                                   int blocks_per_axis = kStrongBlocksPerAxis,
                                   int particles_per_axis = kStrongParticlesPerAxis);

std::string weak_csv(const std::vector<BenchRow>& rows);
std::string strong_csv(const std::vector<BenchRow>& rows);

std::uint64_t fnv1a_file(const std::string& path);

}  // namespace amrckpt
