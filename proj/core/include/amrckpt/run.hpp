#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "amrckpt/async_io.hpp"
#include "amrckpt/sedov.hpp"

namespace amrckpt {

/// A Sedov checkpoint train. Every field has a key in the key=value config
/// format; see apply_setting for the names.
struct RunConfig {
  Domain domain = default_sedov_domain();
  SedovParams sedov;
  Representation rep = Representation::Octree;
  RefineConfig refine;
  int refine_interval = 2;
  int particles_nx = 16;
  int particles_ny = 16;
  /// Steps between checkpoints.
  int checkpoint_interval = 5;
  /// Files in the train, the initial state included.
  int num_checkpoints = 8;
  IoMode io_mode = IoMode::Sync;
  int virtual_ranks = 1;
  std::string output_dir = "amrckpt_out";
  /// workers, max_in_flight, write_delay_s; virtual_ranks is copied in.
  AsyncOptions async;

  void validate() const;
  AsyncOptions io_options() const;
};

/// Sets one key. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Lines of `key = value`; '#' starts a comment; blank lines ignored.
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});
std::string render_run_config(const RunConfig& cfg);

/// AMRCKPT_WORKERS, when set, replaces the async worker count.
void apply_environment(RunConfig& cfg);

/// chk_0007.flxc
std::string checkpoint_name(std::int64_t n);

/// One solver step with tracer advection: positions move through the
/// start-of-step velocity, fields are sampled on the updated mesh.
double simulation_step(HydroState& state, ParticleSet& ps, double t_end);

struct RunResult {
  std::vector<std::string> files;
  std::vector<WriteRecord> records;
  IoReport report;
  /// Wall time from the first checkpoint of this invocation to the final wait.
  double wall_s = 0.0;
  HydroState state;
  ParticleSet particles;
  std::int64_t last_checkpoint = 0;
};

/// chk_0001 is the initial state; then one file every checkpoint_interval
/// steps until num_checkpoints files exist or t_end is reached.
RunResult run_train(const RunConfig& cfg);

/// Continues the train of `from_path` under cfg.rep, numbering from the
/// source's checkpoint_number + 1 up to cfg.num_checkpoints.
RunResult restart_train(const RunConfig& cfg, const std::string& from_path);

}  // namespace amrckpt
