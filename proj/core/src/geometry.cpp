#include "amrckpt/geometry.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "amrckpt/errors.hpp"

namespace amrckpt {

namespace {

// Finest level the sfc key can address; base grids up to 2^11 blocks per axis.
constexpr int kKeyLevels = 20;

std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFULL;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFULL;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0FULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

}  // namespace

std::string_view var_name(Var v) { return kVarNames[static_cast<std::size_t>(idx(v))]; }

Var parse_var(std::string_view name) {
  for (int v = 0; v < kNumVars; ++v) {
    if (kVarNames[static_cast<std::size_t>(v)] == name) return static_cast<Var>(v);
  }
  throw ConfigError("unknown variable '" + std::string(name) + "'");
}

std::string_view to_string(Representation rep) {
  return rep == Representation::Octree ? "octree" : "level";
}

Representation parse_representation(std::string_view text) {
  if (text == "octree" || text == "OCTREE") return Representation::Octree;
  if (text == "level" || text == "LEVEL") return Representation::Level;
  throw ConfigError("unknown mesh representation '" + std::string(text) + "' (expected octree|level)");
}

std::uint64_t morton_key(std::uint32_t x, std::uint32_t y) {
  return spread_bits(x) | (spread_bits(y) << 1);
}

std::uint64_t sfc_key(const BlockKey& key) {
  const int shift = kKeyLevels - key.level;
  const auto x = static_cast<std::uint32_t>(key.ix << shift);
  const auto y = static_cast<std::uint32_t>(key.iy << shift);
  return morton_key(x, y);
}

bool canonical_less(const BlockKey& a, const BlockKey& b) {
  if (a.level != b.level) return a.level < b.level;
  return morton_key(static_cast<std::uint32_t>(a.ix), static_cast<std::uint32_t>(a.iy)) <
         morton_key(static_cast<std::uint32_t>(b.ix), static_cast<std::uint32_t>(b.iy));
}

void Domain::validate() const {
  std::ostringstream msg;
  if (!(xhi > xlo)) msg << "xhi must exceed xlo; ";
  if (!(yhi > ylo)) msg << "yhi must exceed ylo; ";
  if (base_nx < 1 || base_ny < 1) msg << "base_nx and base_ny must be >= 1; ";
  if (max_level < 0) msg << "max_level must be >= 0; ";
  if (max_level > kKeyLevels - 1) msg << "max_level too large; ";
  if (base_nx > 2048 || base_ny > 2048) msg << "base grid too large; ";
  if (!std::isfinite(xlo) || !std::isfinite(xhi) || !std::isfinite(ylo) || !std::isfinite(yhi)) {
    msg << "non-finite domain bounds; ";
  }
  const std::string problems = msg.str();
  if (!problems.empty()) throw ConfigError("invalid domain: " + problems);
}

BoundingBox Domain::bnd_box(const BlockKey& k) const {
  const double bw = block_width_x(k.level);
  const double bh = block_width_y(k.level);
  BoundingBox b;
  b.lo = {xlo + static_cast<double>(k.ix) * bw, ylo + static_cast<double>(k.iy) * bh};
  b.hi = {xlo + static_cast<double>(k.ix + 1) * bw, ylo + static_cast<double>(k.iy + 1) * bh};
  return b;
}

std::array<double, 2> Domain::block_center(const BlockKey& k) const {
  const BoundingBox b = bnd_box(k);
  return {0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1])};
}

}  // namespace amrckpt
