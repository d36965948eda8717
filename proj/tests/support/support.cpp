#include "support.hpp"

#include <atomic>
#include <cstring>
#include <limits>
#include <set>

#include <unistd.h>

#include "amrckpt/convert.hpp"

namespace amrckpt::testing {

namespace {

std::atomic<int> dir_counter{0};

template <class T>
bool same_vec(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

bool same_double(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

double odd_value(Rng& rng) {
  switch (uniform_int(rng, 0, 5)) {
    case 0: return -0.0;
    case 1: return std::numeric_limits<double>::denorm_min() * uniform_int(rng, 1, 1000);
    case 2: return uniform(rng, -1.0, 1.0) * 1e300;
    case 3: return uniform(rng, -1.0, 1.0) * 1e-300;
    case 4: return 0.0;
    default: return uniform(rng, -1e6, 1e6);
  }
}

}  // namespace

TempDir::TempDir(const std::string& tag) {
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(dir_counter++));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Domain random_domain(Rng& rng, int max_base, int max_level) {
  Domain d;
  d.xlo = uniform(rng, -2.0, 2.0);
  d.ylo = uniform(rng, -2.0, 2.0);
  d.base_nx = uniform_int(rng, 1, max_base);
  d.base_ny = uniform_int(rng, 1, max_base);
  const double h = uniform(rng, 0.1, 2.0);
  d.xhi = d.xlo + h * d.base_nx;
  d.yhi = d.ylo + h * d.base_ny;
  d.max_level = uniform_int(rng, 0, max_level);
  return d;
}

LeafSet random_leaf_set(Rng& rng, const Domain& domain, double split_prob) {
  LeafSet leaves;
  std::vector<BlockKey> work;
  for (std::int64_t iy = 0; iy < domain.base_ny; ++iy) {
    for (std::int64_t ix = 0; ix < domain.base_nx; ++ix) work.push_back({0, ix, iy});
  }
  while (!work.empty()) {
    const BlockKey k = work.back();
    work.pop_back();
    if (k.level < domain.max_level && uniform(rng, 0.0, 1.0) < split_prob) {
      for (int q = 0; q < 4; ++q) work.push_back(k.child(q));
    } else {
      leaves.insert(k);
    }
  }
  balance(leaves, domain);
  return leaves;
}

std::map<BlockKey, PatchData> random_leaf_data(Rng& rng, const LeafSet& leaves) {
  std::map<BlockKey, PatchData> out;
  for (const auto& k : leaves) {
    PatchData p(kNxb, kNyb);
    for (int j = 0; j < kNyb; ++j) {
      for (int i = 0; i < kNxb; ++i) {
        p.at(Var::Dens, i, j) = uniform(rng, 0.5, 2.0);
        p.at(Var::Pres, i, j) = uniform(rng, 0.1, 3.0);
        p.at(Var::Velx, i, j) = uniform(rng, -1.0, 1.0);
        p.at(Var::Vely, i, j) = uniform(rng, -1.0, 1.0);
        p.at(Var::Ener, i, j) = uniform(rng, 1.0, 5.0);
        p.at(Var::Temp, i, j) = uniform(rng, 0.1, 4.0);
      }
    }
    out.emplace(k, std::move(p));
  }
  return out;
}

std::unique_ptr<MeshAccess> random_mesh(Rng& rng, const Domain& domain, Representation rep) {
  const LeafSet leaves = random_leaf_set(rng, domain);
  return mesh_from_leaves(domain, random_leaf_data(rng, leaves), rep);
}

ParticleSet random_particles(Rng& rng, const Domain& domain, int count) {
  ParticleSet ps;
  std::set<std::pair<std::int64_t, std::int64_t>> used;
  while (static_cast<int>(ps.size()) < count) {
    Particle p;
    p.cpu_id = uniform_int(rng, 0, 7);
    p.tag = uniform_int(rng, 1, 4 * count + 8);
    if (!used.emplace(p.cpu_id, p.tag).second) continue;
    p.global_tag = encode_identity(p.cpu_id, p.tag);
    p.posx = uniform(rng, domain.xlo, domain.xhi);
    p.posy = uniform(rng, domain.ylo, domain.yhi);
    p.ptemp = uniform(rng, 0.0, 10.0);
    p.pdens = uniform(rng, 0.0, 10.0);
    ps.particles.push_back(p);
  }
  ps.sort_canonical();
  return ps;
}

CheckpointSnapshot random_snapshot(Rng& rng) {
  const Domain d = random_domain(rng);
  const Representation rep = uniform_int(rng, 0, 1) ? Representation::Level : Representation::Octree;
  HydroState state(random_mesh(rng, d, rep));
  state.time = uniform(rng, 0.0, 10.0);
  state.dt = uniform(rng, 1e-9, 1e-2);
  state.step = uniform_int(rng, 0, 1 << 20);
  state.gamma = uniform(rng, 1.1, 1.9);
  state.cfl = uniform(rng, 0.1, 0.9);
  state.refine.refine_thresh = uniform(rng, 0.5, 0.9);
  state.refine.derefine_thresh = uniform(rng, 0.0, 0.4);
  state.refine.filter = uniform(rng, 0.0, 0.1);
  state.refine.buffer_cells = uniform_int(rng, 0, 4);
  state.refine.vars = {static_cast<Var>(uniform_int(rng, 0, kNumVars - 1))};
  state.refine_interval = uniform_int(rng, 0, 5);
  const ParticleSet ps = random_particles(rng, d, uniform_int(rng, 0, 40));
  CheckpointSnapshot s = snapshot_of(state, ps, {uniform_int(rng, 0, 9999), std::nullopt});
  // Values no solver would produce still have to survive the codec.
  for (auto& u : s.unknowns) {
    for (int k = 0; k < 8 && !u.empty(); ++k) u[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(u.size()) - 1))] = odd_value(rng);
  }
  return s;
}

bool same_bits(const CheckpointSnapshot& a, const CheckpointSnapshot& b) {
  bool ok = same_double(a.time, b.time) && same_double(a.dt, b.dt) && a.step == b.step &&
            a.checkpoint_number == b.checkpoint_number && a.source_rep == b.source_rep && a.domain == b.domain &&
            same_double(a.gamma, b.gamma) && same_double(a.cfl, b.cfl) &&
            same_double(a.refine.refine_thresh, b.refine.refine_thresh) &&
            same_double(a.refine.derefine_thresh, b.refine.derefine_thresh) &&
            same_double(a.refine.filter, b.refine.filter) && a.refine.vars == b.refine.vars &&
            a.refine.buffer_cells == b.refine.buffer_cells && a.refine_interval == b.refine_interval &&
            a.varnames == b.varnames && same_vec(a.lrefine, b.lrefine) && same_vec(a.bnd_box, b.bnd_box) &&
            same_vec(a.coord, b.coord) && a.unknowns.size() == b.unknowns.size() && same_vec(a.posx, b.posx) &&
            same_vec(a.posy, b.posy) && same_vec(a.ptemp, b.ptemp) && same_vec(a.pdens, b.pdens) &&
            same_vec(a.cpu, b.cpu) && same_vec(a.tag, b.tag);
  for (std::size_t v = 0; ok && v < a.unknowns.size(); ++v) ok = same_vec(a.unknowns[v], b.unknowns[v]);
  return ok;
}

RunConfig small_config(const std::string& out_dir, Representation rep) {
  RunConfig c;
  c.domain.base_nx = 4;
  c.domain.base_ny = 4;
  c.domain.max_level = 2;
  c.sedov.t_end = 0.0;
  c.rep = rep;
  c.particles_nx = 8;
  c.particles_ny = 8;
  c.checkpoint_interval = 3;
  c.num_checkpoints = 4;
  c.output_dir = out_dir;
  return c;
}

double linear_field(int var, double x, double y) {
  return static_cast<double>(var + 1) + 2.0 * x - 0.5 * y + 0.25 * var * y;
}

}  // namespace amrckpt::testing
