#include <benchmark/benchmark.h>

#include <vector>

#include "amrckpt/checkpoint.hpp"
#include "amrckpt/compare.hpp"
#include "amrckpt/hydro.hpp"
#include "amrckpt/particles.hpp"
#include "amrckpt/run.hpp"
#include "amrckpt/partition.hpp"
#include "amrckpt/sedov.hpp"

using namespace amrckpt;

namespace {

struct Blast {
  HydroState state;
  ParticleSet particles;
};

Blast blast(Representation rep, int steps) {
  Blast b{init_sedov(default_sedov_domain(), SedovParams{}, rep), {}};
  b.particles = init_particles(32, 32, *b.state.mesh, partition_leaves(*b.state.mesh, 4));
  for (int n = 0; n < steps; ++n) simulation_step(b.state, b.particles, 0.0);
  return b;
}

const CheckpointSnapshot& snapshot() {
  static const CheckpointSnapshot s = [] {
    const Blast b = blast(Representation::Octree, 40);
    return snapshot_of(b.state, b.particles, {1, std::nullopt});
  }();
  return s;
}

void BM_Encode(benchmark::State& st) {
  const CheckpointSnapshot& s = snapshot();
  std::size_t bytes = 0;
  for (auto _ : st) {
    const auto buf = encode_checkpoint(s);
    bytes = buf.size();
    benchmark::DoNotOptimize(buf.data());
  }
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * bytes));
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State& st) {
  const auto buf = encode_checkpoint(snapshot());
  for (auto _ : st) {
    CheckpointSnapshot s = decode_checkpoint(buf);
    benchmark::DoNotOptimize(s.unknowns.data());
  }
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * buf.size()));
}
BENCHMARK(BM_Decode);

void BM_SampleField(benchmark::State& st) {
  const Blast b = blast(Representation::Octree, 20);
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : b.particles.particles) pts.emplace_back(p.posx, p.posy);
  for (auto _ : st) {
    double sum = 0.0;
    for (const auto& [x, y] : pts) sum += sample_field(*b.state.mesh, Var::Dens, x, y);
    benchmark::DoNotOptimize(sum);
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * pts.size()));
}
BENCHMARK(BM_SampleField);

void BM_Step(benchmark::State& st) {
  const auto rep = st.range(0) == 0 ? Representation::Octree : Representation::Level;
  Blast b = blast(rep, 20);
  for (auto _ : st) simulation_step(b.state, b.particles, 0.0);
  st.SetLabel(std::string(to_string(rep)));
}
BENCHMARK(BM_Step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Compare(benchmark::State& st) {
  const CheckpointSnapshot& a = snapshot();
  for (auto _ : st) {
    const CompareReport r = compare_snapshots(a, a);
    benchmark::DoNotOptimize(r.verdict);
  }
}
BENCHMARK(BM_Compare)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
