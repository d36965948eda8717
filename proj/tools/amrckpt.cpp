#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amrckpt/bench.hpp"
#include "amrckpt/compare.hpp"
#include "amrckpt/errors.hpp"
#include "amrckpt/restart.hpp"
#include "amrckpt/run.hpp"

using namespace amrckpt;

namespace {

struct RunFlags {
  std::string config;
  std::string rep;
  std::string io;
  std::optional<int> ranks;
  std::string out;
  std::vector<std::string> set;
  std::string json;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "key=value run configuration file");
  cmd->add_option("--rep", f.rep, "mesh representation (octree|level)");
  cmd->add_option("--io", f.io, "checkpoint I/O mode (sync|async)");
  cmd->add_option("--ranks", f.ranks, "virtual ranks writing each checkpoint");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.set, "extra key=value setting, applied last")->take_all();
  cmd->add_option("--json", f.json, "also write the I/O report as JSON to this path");
}

RunConfig resolve(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  if (!f.rep.empty()) cfg.rep = parse_representation(f.rep);
  if (!f.io.empty()) cfg.io_mode = parse_io_mode(f.io);
  if (f.ranks) cfg.virtual_ranks = *f.ranks;
  if (!f.out.empty()) cfg.output_dir = f.out;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  apply_environment(cfg);
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

void summarize(const RunResult& r, const RunFlags& f) {
  std::printf("wrote %zu checkpoint(s), last %s\n", r.files.size(),
              r.files.empty() ? "(none)" : r.files.back().c_str());
  std::printf("step %lld  time %.9g  leaves %zu  particles %zu\n", static_cast<long long>(r.state.step),
              r.state.time, r.state.mesh->leaves().size(), r.particles.particles.size());
  std::fputs(render_io_table({r.report}).c_str(), stdout);
  if (!f.json.empty()) write_text(f.json, io_report_json({r.report}));
}

int emit_csv(const std::string& csv, const std::string& dir, const char* name) {
  std::fputs(csv.c_str(), stdout);
  write_text((std::filesystem::path(dir) / name).string(), csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-structured AMR checkpoint/restart toolkit"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run a Sedov blast and write a checkpoint train");
  add_run_flags(run, run_flags);

  RunFlags restart_flags;
  std::string restart_from;
  auto* restart = app.add_subcommand("restart", "continue a checkpoint train, possibly on the other mesh");
  restart->add_option("checkpoint", restart_from, "checkpoint to restart from")->required()->check(CLI::ExistingFile);
  add_run_flags(restart, restart_flags);

  std::string cmp_a, cmp_b, cmp_report;
  double cmp_tol = kDefaultCompareTolerance;
  auto* compare = app.add_subcommand("compare", "compare two checkpoints variable by variable");
  compare->add_option("a", cmp_a, "first checkpoint")->required();
  compare->add_option("b", cmp_b, "second checkpoint")->required();
  compare->add_option("--tol", cmp_tol, "mag_error tolerance for COMPATIBLE")->capture_default_str();
  compare->add_option("--report", cmp_report, "also write the report as JSON to this path");

  std::vector<int> weak_ranks{1, 2, 4, 8}, strong_ranks{1, 2, 4, 8};
  std::string weak_out = "bench_out", strong_out = "bench_out";
  int per_rank = kWeakBlocksPerRank;
  auto* weak = app.add_subcommand("bench-weak", "file size and write time with a fixed number of blocks per rank");
  weak->add_option("--ranks", weak_ranks, "rank counts, comma separated")->delimiter(',');
  weak->add_option("--out", weak_out, "output directory")->capture_default_str();
  weak->add_option("--blocks-per-rank", per_rank, "blocks per rank")->capture_default_str();

  int strong_blocks = kStrongBlocksPerAxis, strong_particles = kStrongParticlesPerAxis;
  auto* strong = app.add_subcommand("bench-strong", "one fixed checkpoint written with increasing rank counts");
  strong->add_option("--ranks", strong_ranks, "rank counts, comma separated")->delimiter(',');
  strong->add_option("--out", strong_out, "output directory")->capture_default_str();
  strong->add_option("--blocks", strong_blocks, "blocks per axis")->capture_default_str();
  strong->add_option("--particles", strong_particles, "particles per axis")->capture_default_str();

  std::string conv_in, conv_out, conv_rep;
  auto* convert = app.add_subcommand("convert", "rewrite a checkpoint as produced by the other representation");
  convert->add_option("input", conv_in, "source checkpoint")->required();
  convert->add_option("output", conv_out, "destination checkpoint")->required();
  convert->add_option("--rep", conv_rep, "target representation (octree|level)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      summarize(run_train(resolve(run_flags)), run_flags);
    } else if (*restart) {
      summarize(restart_train(resolve(restart_flags), restart_from), restart_flags);
    } else if (*compare) {
      const CompareReport r = compare_files(cmp_a, cmp_b, cmp_tol);
      std::fputs(render_report(r).c_str(), stdout);
      if (!cmp_report.empty()) write_text(cmp_report, report_json(r));
      return r.exit_code();
    } else if (*weak) {
      return emit_csv(weak_csv(bench_weak(weak_ranks, weak_out, per_rank)), weak_out, "bench_weak.csv");
    } else if (*strong) {
      return emit_csv(strong_csv(bench_strong(strong_ranks, strong_out, strong_blocks, strong_particles)), strong_out,
                      "bench_strong.csv");
    } else if (*convert) {
      const auto snap = convert_snapshot(read_checkpoint(conv_in), parse_representation(conv_rep));
      const auto bytes = write_checkpoint(conv_out, snap);
      std::printf("wrote %s (%llu bytes, %zu blocks)\n", conv_out.c_str(), static_cast<unsigned long long>(bytes),
                  snap.nblocks());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "amrckpt: configuration error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "amrckpt: error: %s\n", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "amrckpt: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
