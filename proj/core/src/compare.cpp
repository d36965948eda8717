#include "amrckpt/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "amrckpt/errors.hpp"
#include "amrckpt/interp.hpp"
#include "amrckpt/restart.hpp"

namespace amrckpt {

namespace {

std::string level_histogram(const std::vector<BlockKey>& keys) {
  std::map<int, int> per_level;
  for (const auto& k : keys) per_level[k.level]++;
  std::string s;
  for (const auto& [level, n] : per_level) {
    if (!s.empty()) s += " ";
    s += "L" + std::to_string(level) + ":" + std::to_string(n);
  }
  return s;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<BlockKey> finest_common(const std::vector<BlockKey>& ka, const std::vector<BlockKey>& kb) {
  std::set<BlockKey> all(ka.begin(), ka.end());
  all.insert(kb.begin(), kb.end());
  std::set<BlockKey> ancestors;
  for (const auto& k : all) {
    BlockKey p = k;
    while (p.level > 0) {
      p = p.parent();
      if (!ancestors.insert(p).second) break;
    }
  }
  std::vector<BlockKey> out;
  for (const auto& k : all) {
    if (ancestors.count(k) == 0) out.push_back(k);
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

void metrics_json(nlohmann::ordered_json& arr, const std::vector<VarMetrics>& ms) {
  for (const auto& m : ms) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["mag_error"] = m.mag_error;
    j["sup_abs_diff"] = m.sup_abs_diff;
    j["sup_a"] = m.sup_a;
    j["sup_b"] = m.sup_b;
    j["l1_mean_abs_diff"] = m.l1_mean_abs_diff;
    j["n_compared"] = m.n_compared;
    arr.push_back(j);
  }
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Identical: return "IDENTICAL";
    case Verdict::Compatible: return "COMPATIBLE";
    case Verdict::Different: return "DIFFERENT";
  }
  return "DIFFERENT";
}

int CompareReport::exit_code() const {
  if (error) return 2;
  return verdict == Verdict::Different ? 1 : 0;
}

const VarMetrics* CompareReport::find(std::string_view name) const {
  for (const auto* group : {&eulerian, &lagrangian}) {
    for (const auto& m : *group) {
      if (m.name == name) return &m;
    }
  }
  return nullptr;
}

VarMetrics var_metrics(std::string name, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw PairingError("cannot compare " + name + ": " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " values");
  }
  VarMetrics m;
  m.name = std::move(name);
  m.n_compared = static_cast<std::int64_t>(a.size());
  if (a.empty()) return m;
  bool nan = false;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    nan = nan || std::isnan(d);
    m.sup_abs_diff = std::max(m.sup_abs_diff, d);
    m.sup_a = std::max(m.sup_a, std::abs(a[k]));
    m.sup_b = std::max(m.sup_b, std::abs(b[k]));
    sum += d;
  }
  if (nan) m.sup_abs_diff = std::nan("");
  m.l1_mean_abs_diff = sum / static_cast<double>(a.size());
  m.mag_error = m.sup_abs_diff / std::max({m.sup_a, m.sup_b, kMagErrorFloor});
  return m;
}

double mag_error(std::span<const double> a, std::span<const double> b) { return var_metrics("", a, b).mag_error; }

std::vector<PairedArrays> align_eulerian(const CheckpointSnapshot& a, const CheckpointSnapshot& b,
                                         bool* exact_pairing) {
  if (!(a.domain == b.domain)) throw StructureError("checkpoints describe different domains");
  const std::set<std::string> va(a.varnames.begin(), a.varnames.end());
  const std::set<std::string> vb(b.varnames.begin(), b.varnames.end());
  if (va != vb) throw StructureError("checkpoints carry different variable sets");

  const auto ka = a.block_keys();
  const auto kb = b.block_keys();
  std::vector<PairedArrays> out;
  if (ka == kb) {
    if (exact_pairing) *exact_pairing = true;
    for (std::size_t v = 0; v < a.varnames.size(); ++v) {
      const int w = b.var_index(a.varnames[v]);
      out.push_back({a.varnames[v], a.unknowns[v], b.unknowns[static_cast<std::size_t>(w)]});
    }
    return out;
  }

  if (exact_pairing) *exact_pairing = false;
  const auto ma = mesh_from_snapshot(a, Representation::Octree);
  const auto mb = mesh_from_snapshot(b, Representation::Octree);
  const auto common = finest_common(ka, kb);
  for (std::size_t v = 0; v < a.varnames.size(); ++v) out.push_back({a.varnames[v], {}, {}});
  for (auto& p : out) {
    p.a.reserve(common.size() * kCellsPerBlock);
    p.b.reserve(common.size() * kCellsPerBlock);
  }
  for (const auto& k : common) {
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        const CellValues ca = sample_cell(*ma, k.level, k.ix * kNxb + i, k.iy * kNyb + j);
        const CellValues cb = sample_cell(*mb, k.level, k.ix * kNxb + i, k.iy * kNyb + j);
        for (std::size_t v = 0; v < out.size(); ++v) {
          out[v].a.push_back(ca[v]);
          out[v].b.push_back(cb[v]);
        }
      }
    }
  }
  return out;
}

ParticlePairing align_particles(const CheckpointSnapshot& a, const CheckpointSnapshot& b) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> in_a;
  for (std::size_t k = 0; k < a.nparticles(); ++k) in_a.emplace(std::make_pair(a.cpu[k], a.tag[k]), k);
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<std::size_t, std::size_t>> matched;
  ParticlePairing out;
  for (std::size_t k = 0; k < b.nparticles(); ++k) {
    const auto id = std::make_pair(b.cpu[k], b.tag[k]);
    const auto it = in_a.find(id);
    if (it == in_a.end()) {
      ++out.unmatched_b;
      continue;
    }
    matched.emplace(id, std::make_pair(it->second, k));
  }
  out.matched = static_cast<std::int64_t>(matched.size());
  out.unmatched_a = static_cast<std::int64_t>(a.nparticles()) - out.matched;
  const std::array<std::pair<const char*, std::pair<const std::vector<double>*, const std::vector<double>*>>, 4> vars =
      {{{"posx", {&a.posx, &b.posx}}, {"posy", {&a.posy, &b.posy}}, {"ptemp", {&a.ptemp, &b.ptemp}},
        {"pdens", {&a.pdens, &b.pdens}}}};
  for (const auto& [name, arrays] : vars) {
    PairedArrays p{name, {}, {}};
    for (const auto& [id, idx] : matched) {
      p.a.push_back((*arrays.first)[idx.first]);
      p.b.push_back((*arrays.second)[idx.second]);
    }
    out.vars.push_back(std::move(p));
  }
  return out;
}

CompareReport compare_snapshots(const CheckpointSnapshot& a, const CheckpointSnapshot& b, double tolerance) {
  CompareReport r;
  r.tolerance = tolerance;
  auto diff = [&](std::string item, std::string va, std::string vb) {
    if (va != vb) r.diffs.push_back({std::move(item), std::move(va), std::move(vb)});
  };
  try {
    diff("nblocks", std::to_string(a.nblocks()), std::to_string(b.nblocks()));
    diff("nparticles", std::to_string(a.nparticles()), std::to_string(b.nparticles()));
    diff("time", fmt_g(a.time), fmt_g(b.time));
    diff("step", std::to_string(a.step), std::to_string(b.step));
    std::string vna, vnb;
    for (const auto& v : a.varnames) vna += (vna.empty() ? "" : ",") + v;
    for (const auto& v : b.varnames) vnb += (vnb.empty() ? "" : ",") + v;
    diff("variables", vna, vnb);
    const auto ka = a.block_keys();
    const auto kb = b.block_keys();
    diff("levels", level_histogram(ka), level_histogram(kb));
    if (ka != kb && level_histogram(ka) == level_histogram(kb)) r.diffs.push_back({"leaf blocks", "differ", "differ"});

    for (const auto& p : align_eulerian(a, b, &r.exact_pairing)) r.eulerian.push_back(var_metrics(p.name, p.a, p.b));
    const ParticlePairing pp = align_particles(a, b);
    r.matched_particles = pp.matched;
    r.unmatched_a = pp.unmatched_a;
    r.unmatched_b = pp.unmatched_b;
    if (pp.unmatched_a != 0 || pp.unmatched_b != 0) {
      r.diffs.push_back({"unmatched particles", std::to_string(pp.unmatched_a), std::to_string(pp.unmatched_b)});
    }
    for (const auto& p : pp.vars) r.lagrangian.push_back(var_metrics(p.name, p.a, p.b));
  } catch (const Error& e) {
    r.error = true;
    r.error_message = e.what();
    r.eulerian.clear();
    r.lagrangian.clear();
    r.verdict = Verdict::Different;
    return r;
  }

  bool all_zero = true;
  bool all_within = true;
  for (const auto* group : {&r.eulerian, &r.lagrangian}) {
    for (const auto& m : *group) {
      all_zero = all_zero && m.mag_error == 0.0;
      all_within = all_within && m.mag_error <= tolerance;
    }
  }
  if (all_zero && r.diffs.empty()) r.verdict = Verdict::Identical;
  else if (all_within) r.verdict = Verdict::Compatible;
  else r.verdict = Verdict::Different;
  return r;
}

CompareReport compare_files(const std::string& path_a, const std::string& path_b, double tolerance) {
  CompareReport r;
  try {
    const CheckpointSnapshot a = read_checkpoint(path_a);
    const CheckpointSnapshot b = read_checkpoint(path_b);
    r = compare_snapshots(a, b, tolerance);
  } catch (const Error& e) {
    r = CompareReport{};
    r.tolerance = tolerance;
    r.error = true;
    r.error_message = e.what();
    r.verdict = Verdict::Different;
  }
  r.file_a = path_a;
  r.file_b = path_b;
  return r;
}

std::string render_report(const CompareReport& r) {
  std::string out;
  char line[256];
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(line, sizeof line, fmt, args...);
    out += line;
  };
  add("A: %s\nB: %s\n", r.file_a.c_str(), r.file_b.c_str());
  if (r.error) {
    add("error: %s\n", r.error_message.c_str());
  } else {
    add("pairing: %s\n", r.exact_pairing ? "block by block" : "common refinement");
    add("%-8s %-6s %24s %24s %24s %24s %24s %10s\n", "group", "var", "mag_error", "sup|a-b|", "sup|a|", "sup|b|",
        "mean|a-b|", "n");
    for (const auto& [group, ms] : {std::pair<const char*, const std::vector<VarMetrics>*>{"euler", &r.eulerian},
                                    std::pair<const char*, const std::vector<VarMetrics>*>{"lagrange", &r.lagrangian}}) {
      for (const auto& m : *ms) {
        add("%-8s %-6s %24.17g %24.17g %24.17g %24.17g %24.17g %10lld\n", group, m.name.c_str(), m.mag_error,
            m.sup_abs_diff, m.sup_a, m.sup_b, m.l1_mean_abs_diff, static_cast<long long>(m.n_compared));
      }
    }
    add("particles: %lld matched, %lld only in A, %lld only in B\n", static_cast<long long>(r.matched_particles),
        static_cast<long long>(r.unmatched_a), static_cast<long long>(r.unmatched_b));
    for (const auto& d : r.diffs) add("differs: %s: %s | %s\n", d.item.c_str(), d.a.c_str(), d.b.c_str());
  }
  add("verdict: %s (tolerance %g)\n", std::string(to_string(r.verdict)).c_str(), r.tolerance);
  return out;
}

std::string report_json(const CompareReport& r) {
  nlohmann::ordered_json j;
  j["schema"] = "amrckpt.compare.v1";
  j["file_a"] = r.file_a;
  j["file_b"] = r.file_b;
  j["tolerance"] = r.tolerance;
  j["verdict"] = std::string(to_string(r.verdict));
  j["exit_code"] = r.exit_code();
  j["error"] = r.error ? nlohmann::ordered_json(r.error_message) : nlohmann::ordered_json(nullptr);
  j["exact_pairing"] = r.exact_pairing;
  j["eulerian"] = nlohmann::ordered_json::array();
  metrics_json(j["eulerian"], r.eulerian);
  j["lagrangian"] = nlohmann::ordered_json::array();
  metrics_json(j["lagrangian"], r.lagrangian);
  j["particles"] = {{"matched", r.matched_particles}, {"unmatched_a", r.unmatched_a}, {"unmatched_b", r.unmatched_b}};
  j["structural_diffs"] = nlohmann::ordered_json::array();
  for (const auto& d : r.diffs) j["structural_diffs"].push_back({{"item", d.item}, {"a", d.a}, {"b", d.b}});
  return j.dump(2) + "\n";
}

}  // namespace amrckpt
