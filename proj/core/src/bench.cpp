#include "amrckpt/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "amrckpt/errors.hpp"
#include "amrckpt/partition.hpp"
#include "amrckpt/sedov.hpp"

namespace amrckpt {

namespace {

BenchRow timed_write(const std::string& path, const CheckpointSnapshot& snap, int ranks) {
  BenchRow row;
  row.ranks = ranks;
  row.blocks = static_cast<std::int64_t>(snap.nblocks());
  row.particles = static_cast<std::int64_t>(snap.nparticles());
  row.path = path;
  const auto t0 = std::chrono::steady_clock::now();
  const RankedWriteStats stats = write_checkpoint_ranked(path, snap, ranks);
  row.t_checkpoint_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  row.t_particles_s = stats.t_particles_s;
  row.file_bytes = stats.bytes;
  row.checksum = fnv1a_file(path);
  return row;
}

std::string rank_file(const std::string& dir, const char* stem, int ranks) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_R%03d.flxc", stem, ranks);
  return (std::filesystem::path(dir) / name).string();
}

std::string csv(const char* header, const std::vector<BenchRow>& rows, bool checksum) {
  std::string out = std::string(header) + "\nranks,blocks,particles,file_bytes,t_particles_s,t_checkpoint_s";
  out += checksum ? ",checksum\n" : "\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%d,%lld,%lld,%llu,%.6f,%.6f", r.ranks, static_cast<long long>(r.blocks),
                  static_cast<long long>(r.particles), static_cast<unsigned long long>(r.file_bytes), r.t_particles_s,
                  r.t_checkpoint_s);
    out += line;
    if (checksum) {
      std::snprintf(line, sizeof line, ",%016llx", static_cast<unsigned long long>(r.checksum));
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::pair<int, int> block_grid(std::int64_t blocks) {
  if (blocks < 1) throw ConfigError("block count must be positive");
  auto nx = static_cast<std::int64_t>(std::sqrt(static_cast<double>(blocks)));
  while (nx > 1 && blocks % nx != 0) --nx;
  while ((nx + 1) * (nx + 1) <= blocks && blocks % (nx + 1) == 0) ++nx;
  return {static_cast<int>(nx), static_cast<int>(blocks / nx)};
}

CheckpointSnapshot static_snapshot(int nx, int ny, int px, int py, int ranks) {
  if (static_cast<std::int64_t>(nx) * ny < ranks) {
    throw ConfigError(std::to_string(ranks) + " ranks for " + std::to_string(nx * ny) + " blocks");
  }
  Domain d;
  d.xhi = 0.125 * nx;
  d.yhi = 0.125 * ny;
  d.base_nx = nx;
  d.base_ny = ny;
  d.max_level = 0;
  SedovParams params;
  HydroState state = init_sedov(d, params, Representation::Octree, {}, 0);
  const ParticleSet ps = init_particles(px, py, *state.mesh, partition_leaves(*state.mesh, ranks));
  return snapshot_of(state, ps, {0, std::nullopt});
}

std::vector<BenchRow> bench_weak(const std::vector<int>& ranks, const std::string& out_dir, int blocks_per_rank) {
  if (blocks_per_rank < 1) throw ConfigError("blocks per rank must be positive");
  for (const int r : ranks) {
    if (r < 1) throw ConfigError("rank counts must be positive");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<BenchRow> rows;
  for (const int r : ranks) {
    const auto [nx, ny] = block_grid(static_cast<std::int64_t>(blocks_per_rank) * r);
    const CheckpointSnapshot snap = static_snapshot(nx, ny, 2 * nx, 2 * ny, r);
    rows.push_back(timed_write(rank_file(out_dir, "weak", r), snap, r));
  }
  return rows;
}

std::vector<BenchRow> bench_strong(const std::vector<int>& ranks, const std::string& out_dir, int blocks_per_axis,
                                   int particles_per_axis) {
  const std::int64_t nblocks = static_cast<std::int64_t>(blocks_per_axis) * blocks_per_axis;
  for (const int r : ranks) {
    if (r < 1 || r > nblocks) {
      throw ConfigError("rank count " + std::to_string(r) + " outside [1, " + std::to_string(nblocks) + "]");
    }
  }
  std::filesystem::create_directories(out_dir);
  const CheckpointSnapshot snap =
      static_snapshot(blocks_per_axis, blocks_per_axis, particles_per_axis, particles_per_axis, 1);
  std::vector<BenchRow> rows;
  for (const int r : ranks) rows.push_back(timed_write(rank_file(out_dir, "strong", r), snap, r));
  return rows;
}

std::string weak_csv(const std::vector<BenchRow>& rows) { return csv("# amrckpt bench-weak v1", rows, false); }
std::string strong_csv(const std::vector<BenchRow>& rows) { return csv("# amrckpt bench-strong v1", rows, true); }

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace amrckpt
