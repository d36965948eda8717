#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amrckpt/hydro.hpp"
#include "amrckpt/particles.hpp"

namespace amrckpt {

inline constexpr char kFlxcMagic[4] = {'F', 'L', 'X', 'C'};
inline constexpr std::uint32_t kFlxcVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::size_t kTableEntryBytes = 72;
inline constexpr std::size_t kSectionNameBytes = 16;
inline constexpr std::size_t kScalarNameBytes = 16;
inline constexpr std::size_t kVarNameBytes = 4;

enum class DType : std::uint32_t { F64 = 1, I64 = 2, Utf8 = 3 };

/// Everything needed to resume a run: leaf blocks in canonical order,
/// interior cells only, and particles in (cpu, tag) order.
struct CheckpointSnapshot {
  double time = 0.0;
  double dt = 0.0;
  std::int64_t step = 0;
  std::int64_t checkpoint_number = 0;
  Representation source_rep = Representation::Octree;
  Domain domain;
  double gamma = 1.4;
  double cfl = 0.4;
  RefineConfig refine;
  std::int64_t refine_interval = 2;

  std::vector<std::string> varnames;
  /// 1-based refinement level per block.
  std::vector<std::int64_t> lrefine;
  /// [nblocks][axis][lo, hi].
  std::vector<double> bnd_box;
  /// [nblocks][2] block centers.
  std::vector<double> coord;
  /// Per variable, [nblocks][8][8] with i fastest.
  std::vector<std::vector<double>> unknowns;

  std::vector<double> posx;
  std::vector<double> posy;
  std::vector<double> ptemp;
  std::vector<double> pdens;
  std::vector<std::int64_t> cpu;
  std::vector<std::int64_t> tag;

  std::size_t nblocks() const { return lrefine.size(); }
  std::size_t nparticles() const { return posx.size(); }
  /// Block keys recovered from lrefine and bnd_box. Throws FormatError
  /// (BadValue) when a box does not sit on the block lattice.
  std::vector<BlockKey> block_keys() const;
  /// Index of variable `name`, or -1.
  int var_index(std::string_view name) const;
  /// Throws FormatError (ShapeMismatch) when array lengths disagree.
  void check_shapes() const;
};

struct SectionEntry {
  std::string name;
  DType dtype = DType::F64;
  std::uint32_t rank = 1;
  std::array<std::uint64_t, 4> dims{};
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;
};

/// Section table of a snapshot's file, in file order.
struct ContainerLayout {
  std::vector<SectionEntry> sections;

  std::uint64_t table_end() const { return kHeaderBytes + kTableEntryBytes * sections.size(); }
  std::uint64_t file_size() const;
  const SectionEntry* find(std::string_view name) const;
};

ContainerLayout layout_of(const CheckpointSnapshot& snap);

/// 16 + 72*S + sum of section bytes, from counts alone.
std::uint64_t predicted_file_size(std::size_t nblocks, std::size_t nparticles, std::size_t nvars = kNumVars);

std::vector<std::uint8_t> encode_checkpoint(const CheckpointSnapshot& snap);
CheckpointSnapshot decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes `path` via a temporary sibling that is renamed into place. Returns
/// bytes written. Throws IoError naming the path; no partial file remains.
std::uint64_t write_checkpoint(const std::string& path, const CheckpointSnapshot& snap);
CheckpointSnapshot read_checkpoint(const std::string& path);

struct RankedWriteStats {
  std::uint64_t bytes = 0;
  /// Wall time of the block-data phase and the particle phase.
  double t_grid_s = 0.0;
  double t_particles_s = 0.0;
};

/// Same bytes as write_checkpoint, produced by `nranks` virtual ranks that
/// each write their contiguous block range and particle chunk at precomputed
/// offsets of a pre-sized file.
RankedWriteStats write_checkpoint_ranked(const std::string& path, const CheckpointSnapshot& snap, int nranks);

struct SnapshotMeta {
  std::int64_t checkpoint_number = 0;
  /// Recorded provenance; defaults to the state's representation.
  std::optional<Representation> source_rep;
};

CheckpointSnapshot snapshot_of(const HydroState& state, const ParticleSet& ps, const SnapshotMeta& meta);

/// Byte-level equality of two snapshots.
bool bit_identical(const CheckpointSnapshot& a, const CheckpointSnapshot& b);

}  // namespace amrckpt
