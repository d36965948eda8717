#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amrckpt/checkpoint.hpp"

namespace amrckpt {

inline constexpr double kDefaultCompareTolerance = 1e-12;
inline constexpr double kMagErrorFloor = 1e-99;

enum class Verdict { Identical, Compatible, Different };
std::string_view to_string(Verdict v);

struct VarMetrics {
  std::string name;
  double mag_error = 0.0;
  double sup_abs_diff = 0.0;
  double sup_a = 0.0;
  double sup_b = 0.0;
  double l1_mean_abs_diff = 0.0;
  std::int64_t n_compared = 0;
};

struct StructuralDiff {
  std::string item;
  std::string a;
  std::string b;
};

struct CompareReport {
  std::string file_a;
  std::string file_b;
  double tolerance = kDefaultCompareTolerance;
  /// Leaf structures equal, so cells were paired one to one.
  bool exact_pairing = true;
  std::vector<VarMetrics> eulerian;
  std::vector<VarMetrics> lagrangian;
  std::int64_t matched_particles = 0;
  std::int64_t unmatched_a = 0;
  std::int64_t unmatched_b = 0;
  std::vector<StructuralDiff> diffs;
  /// Files could not be compared (unreadable, different domain or variables).
  bool error = false;
  std::string error_message;
  Verdict verdict = Verdict::Identical;

  /// 0 identical or compatible, 1 different, 2 unreadable or incomparable.
  int exit_code() const;
  const VarMetrics* find(std::string_view name) const;
};

/// sup|a-b| / max(sup|a|, sup|b|, 1e-99); 0 for empty arrays. Throws
/// PairingError when the lengths differ.
double mag_error(std::span<const double> a, std::span<const double> b);
VarMetrics var_metrics(std::string name, std::span<const double> a, std::span<const double> b);

struct PairedArrays {
  std::string name;
  std::vector<double> a;
  std::vector<double> b;
};

/// Cell values of every shared variable, paired block by block when the leaf
/// structures agree and on the common refinement (finer of the two leaves,
/// coarser side prolonged) otherwise. Throws StructureError for different
/// domains or variable sets.
std::vector<PairedArrays> align_eulerian(const CheckpointSnapshot& a, const CheckpointSnapshot& b,
                                         bool* exact_pairing = nullptr);

struct ParticlePairing {
  std::vector<PairedArrays> vars;  // posx, posy, ptemp, pdens
  std::int64_t matched = 0;
  std::int64_t unmatched_a = 0;
  std::int64_t unmatched_b = 0;
};

/// Particles paired by (cpu_id, tag), in identity order.
ParticlePairing align_particles(const CheckpointSnapshot& a, const CheckpointSnapshot& b);

CompareReport compare_snapshots(const CheckpointSnapshot& a, const CheckpointSnapshot& b,
                                double tolerance = kDefaultCompareTolerance);

/// Never throws for unreadable or corrupt inputs; those yield error = true.
CompareReport compare_files(const std::string& path_a, const std::string& path_b,
                            double tolerance = kDefaultCompareTolerance);

std::string render_report(const CompareReport& r);
/// JSON document, schema "amrckpt.compare.v1".
std::string report_json(const CompareReport& r);

}  // namespace amrckpt
