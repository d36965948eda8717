#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>

namespace amrckpt {

// Fixed block size; every mesh in the library is made of 8x8 cell blocks
// with one guard layer.
inline constexpr int kNxb = 8;
inline constexpr int kNyb = 8;
inline constexpr int kNguard = 1;
inline constexpr int kCellsPerBlock = kNxb * kNyb;

/// Eulerian variables carried by every cell, in storage order.
enum class Var : int { Dens = 0, Pres, Velx, Vely, Ener, Temp };
inline constexpr int kNumVars = 6;
inline constexpr std::array<std::string_view, kNumVars> kVarNames = {"dens", "pres", "velx",
                                                                     "vely", "ener", "temp"};

constexpr int idx(Var v) { return static_cast<int>(v); }
std::string_view var_name(Var v);
/// Throws ConfigError for names outside the fixed variable set.
Var parse_var(std::string_view name);

enum class Representation : int { Octree = 0, Level = 1 };
std::string_view to_string(Representation rep);
Representation parse_representation(std::string_view text);

struct BoundingBox {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  bool contains_closed(double x, double y) const {
    return x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1];
  }
};

/// Block address: refinement level and integer block coordinates at that level.
struct BlockKey {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  friend auto operator<=>(const BlockKey&, const BlockKey&) = default;

  BlockKey parent() const { return {level - 1, ix >> 1, iy >> 1}; }
  /// Quadrant q in Morton order: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1).
  BlockKey child(int q) const { return {level + 1, 2 * ix + (q & 1), 2 * iy + (q >> 1)}; }
  int quadrant() const { return static_cast<int>((ix & 1) | ((iy & 1) << 1)); }
};

struct BlockKeyHash {
  std::size_t operator()(const BlockKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.level) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.ix) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.iy) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

/// Interleaves x into even bits and y into odd bits.
std::uint64_t morton_key(std::uint32_t x, std::uint32_t y);

/// Morton key of the block scaled to a common finest level, so keys of blocks
/// at different levels are comparable along one space-filling curve.
std::uint64_t sfc_key(const BlockKey& key);

/// Canonical block order: levels ascending, Morton order within a level.
bool canonical_less(const BlockKey& a, const BlockKey& b);

/// Physical extent and base block layout of a 2D simulation.
struct Domain {
  double xlo = 0.0;
  double xhi = 1.0;
  double ylo = 0.0;
  double yhi = 1.0;
  int base_nx = 1;
  int base_ny = 1;
  int max_level = 0;

  friend bool operator==(const Domain&, const Domain&) = default;

  /// Throws ConfigError when the invariants do not hold.
  void validate() const;

  std::int64_t nblocks_x(int level) const { return static_cast<std::int64_t>(base_nx) << level; }
  std::int64_t nblocks_y(int level) const { return static_cast<std::int64_t>(base_ny) << level; }
  std::int64_t ncells_x(int level) const { return nblocks_x(level) * kNxb; }
  std::int64_t ncells_y(int level) const { return nblocks_y(level) * kNyb; }

  double block_width_x(int level) const { return (xhi - xlo) / static_cast<double>(nblocks_x(level)); }
  double block_width_y(int level) const { return (yhi - ylo) / static_cast<double>(nblocks_y(level)); }
  double cell_width_x(int level) const { return block_width_x(level) / kNxb; }
  double cell_width_y(int level) const { return block_width_y(level) / kNyb; }

  bool contains_block(const BlockKey& k) const {
    return k.level >= 0 && k.ix >= 0 && k.iy >= 0 && k.ix < nblocks_x(k.level) &&
           k.iy < nblocks_y(k.level);
  }
  bool contains_cell(int level, std::int64_t i, std::int64_t j) const {
    return i >= 0 && j >= 0 && i < ncells_x(level) && j < ncells_y(level);
  }
  bool contains_point(double x, double y) const {
    return x >= xlo && x <= xhi && y >= ylo && y <= yhi;
  }

  BoundingBox bnd_box(const BlockKey& k) const;
  std::array<double, 2> block_center(const BlockKey& k) const;
  double cell_center_x(int level, std::int64_t i) const {
    return xlo + (static_cast<double>(i) + 0.5) * cell_width_x(level);
  }
  double cell_center_y(int level, std::int64_t j) const {
    return ylo + (static_cast<double>(j) + 0.5) * cell_width_y(level);
  }
};

}  // namespace amrckpt
