#include "amrckpt/run.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <optional>
#include <sstream>

#include "amrckpt/errors.hpp"
#include "amrckpt/partition.hpp"
#include "amrckpt/restart.hpp"

namespace amrckpt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("bad number for " + std::string(key) + ": '" + s + "'");
  return x;
}

int to_int(std::string_view key, std::string_view v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return x;
}

std::vector<Var> to_vars(std::string_view v) {
  std::vector<Var> vars;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) vars.push_back(parse_var(item));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return vars;
}

bool reached(const HydroState& state, double t_end) { return t_end > 0.0 && state.time >= t_end; }

class Train {
 public:
  Train(const RunConfig& cfg, RunResult& out) : cfg_(cfg), out_(out), opts_(cfg.io_options()) {
    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.io_mode == IoMode::Async) es_.emplace(opts_);
    start_ = Clock::now();
  }

  void emit(std::int64_t n) {
    const auto t0 = Clock::now();
    CheckpointSnapshot snap = snapshot_of(out_.state, out_.particles, {n, std::nullopt});
    const double t_snap = seconds_since(t0);
    const std::string path = (std::filesystem::path(cfg_.output_dir) / checkpoint_name(n)).string();
    if (es_) {
      es_->write_async(path, std::move(snap));
      snap_times_.push_back(t_snap);
    } else {
      WriteRecord rec = write_sync(path, snap, opts_);
      rec.submit_blocking_s += t_snap;
      out_.records.push_back(rec);
    }
    out_.files.push_back(path);
    out_.last_checkpoint = n;
  }

  void finish() {
    double terminal_wait = 0.0;
    if (es_) {
      const auto t0 = Clock::now();
      out_.records = es_->wait();
      terminal_wait = seconds_since(t0);
      for (std::size_t k = 0; k < out_.records.size(); ++k) out_.records[k].submit_blocking_s += snap_times_[k];
      es_->close();
    }
    out_.wall_s = std::max(seconds_since(start_), 1e-9);
    out_.report = io_report(out_.records, cfg_.io_mode, out_.wall_s, cfg_.virtual_ranks, terminal_wait);
  }

 private:
  const RunConfig& cfg_;
  RunResult& out_;
  AsyncOptions opts_;
  std::optional<EventSet> es_;
  std::vector<double> snap_times_;
  Clock::time_point start_;
};

// Steps and writes checkpoints next, next+1, ... up to num_checkpoints.
void continue_train(const RunConfig& cfg, Train& train, RunResult& out, std::int64_t next) {
  const double t_end = cfg.sedov.t_end;
  if (cfg.checkpoint_interval == 0) return;
  for (std::int64_t n = next; n <= cfg.num_checkpoints; ++n) {
    if (reached(out.state, t_end)) break;
    for (int k = 0; k < cfg.checkpoint_interval && !reached(out.state, t_end); ++k) {
      simulation_step(out.state, out.particles, t_end);
    }
    train.emit(n);
  }
}

}  // namespace

void RunConfig::validate() const {
  domain.validate();
  sedov.validate();
  refine.validate();
  if (refine_interval < 0) throw ConfigError("refine_interval must be non-negative");
  if (particles_nx < 1 || particles_ny < 1) throw ConfigError("particle lattice must be at least 1x1");
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be non-negative");
  if (num_checkpoints < 1) throw ConfigError("num_checkpoints must be at least 1");
  if (num_checkpoints > 9999) throw ConfigError("num_checkpoints must not exceed 9999");
  if (virtual_ranks < 1) throw ConfigError("ranks must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  io_options().validate();
}

AsyncOptions RunConfig::io_options() const {
  AsyncOptions o = async;
  o.virtual_ranks = virtual_ranks;
  return o;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  auto d = [&] { return to_double(key, value); };
  auto i = [&] { return to_int(key, value); };
  if (key == "xmin") cfg.domain.xlo = d();
  else if (key == "xmax") cfg.domain.xhi = d();
  else if (key == "ymin") cfg.domain.ylo = d();
  else if (key == "ymax") cfg.domain.yhi = d();
  else if (key == "base_nx") cfg.domain.base_nx = i();
  else if (key == "base_ny") cfg.domain.base_ny = i();
  else if (key == "max_level") cfg.domain.max_level = i();
  else if (key == "gamma") cfg.sedov.gamma = d();
  else if (key == "E0") cfg.sedov.E0 = d();
  else if (key == "r0") cfg.sedov.r0 = d();
  else if (key == "rho0") cfg.sedov.rho0 = d();
  else if (key == "p0") cfg.sedov.p0 = d();
  else if (key == "cfl") cfg.sedov.cfl = d();
  else if (key == "t_end") cfg.sedov.t_end = d();
  else if (key == "rep") cfg.rep = parse_representation(value);
  else if (key == "refine_thresh") cfg.refine.refine_thresh = d();
  else if (key == "derefine_thresh") cfg.refine.derefine_thresh = d();
  else if (key == "refine_filter") cfg.refine.filter = d();
  else if (key == "refine_vars") cfg.refine.vars = to_vars(value);
  else if (key == "buffer_cells") cfg.refine.buffer_cells = i();
  else if (key == "refine_interval") cfg.refine_interval = i();
  else if (key == "particles_nx") cfg.particles_nx = i();
  else if (key == "particles_ny") cfg.particles_ny = i();
  else if (key == "checkpoint_interval") cfg.checkpoint_interval = i();
  else if (key == "num_checkpoints") cfg.num_checkpoints = i();
  else if (key == "io") cfg.io_mode = parse_io_mode(value);
  else if (key == "ranks") cfg.virtual_ranks = i();
  else if (key == "output_dir") cfg.output_dir = std::string(value);
  else if (key == "workers") cfg.async.workers = i();
  else if (key == "max_in_flight") cfg.async.max_in_flight = i();
  else if (key == "write_delay") cfg.async.write_delay_s = d();
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  int lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value, got '" + std::string(line) + "'");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string render_run_config(const RunConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "xmin = " << c.domain.xlo << "\nxmax = " << c.domain.xhi << "\nymin = " << c.domain.ylo
    << "\nymax = " << c.domain.yhi << "\nbase_nx = " << c.domain.base_nx << "\nbase_ny = " << c.domain.base_ny
    << "\nmax_level = " << c.domain.max_level << "\ngamma = " << c.sedov.gamma << "\nE0 = " << c.sedov.E0
    << "\nr0 = " << c.sedov.r0 << "\nrho0 = " << c.sedov.rho0 << "\n";
  if (c.sedov.p0) o << "p0 = " << *c.sedov.p0 << "\n";
  o << "cfl = " << c.sedov.cfl << "\nt_end = " << c.sedov.t_end << "\nrep = " << to_string(c.rep)
    << "\nrefine_thresh = " << c.refine.refine_thresh << "\nderefine_thresh = " << c.refine.derefine_thresh
    << "\nrefine_filter = " << c.refine.filter << "\nrefine_vars = ";
  for (std::size_t k = 0; k < c.refine.vars.size(); ++k) o << (k ? "," : "") << var_name(c.refine.vars[k]);
  o << "\nbuffer_cells = " << c.refine.buffer_cells << "\nrefine_interval = " << c.refine_interval
    << "\nparticles_nx = " << c.particles_nx << "\nparticles_ny = " << c.particles_ny
    << "\ncheckpoint_interval = " << c.checkpoint_interval << "\nnum_checkpoints = " << c.num_checkpoints
    << "\nio = " << (c.io_mode == IoMode::Sync ? "sync" : "async") << "\nranks = " << c.virtual_ranks
    << "\noutput_dir = " << c.output_dir << "\nworkers = " << c.async.workers
    << "\nmax_in_flight = " << c.async.max_in_flight << "\nwrite_delay = " << c.async.write_delay_s << "\n";
  return o.str();
}

void apply_environment(RunConfig& cfg) {
  const char* w = std::getenv("AMRCKPT_WORKERS");
  if (w == nullptr || *w == '\0') return;
  cfg.async.workers = to_int("AMRCKPT_WORKERS", trim(w));
  if (cfg.async.workers < 1) throw ConfigError("AMRCKPT_WORKERS must be at least 1");
}

std::string checkpoint_name(std::int64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "chk_%04lld.flxc", static_cast<long long>(n));
  return buf;
}

double simulation_step(HydroState& state, ParticleSet& ps, double t_end) {
  double dt = compute_dt(state);
  if (t_end > state.time && state.time + dt > t_end) dt = t_end - state.time;
  advect_positions(ps, *state.mesh, dt);
  advance(state, dt);
  interpolate_fields(ps, *state.mesh);
  return dt;
}

RunResult run_train(const RunConfig& cfg) {
  cfg.validate();
  RunResult out;
  out.state = init_sedov(cfg.domain, cfg.sedov, cfg.rep, cfg.refine, cfg.refine_interval);
  out.particles = init_particles(cfg.particles_nx, cfg.particles_ny, *out.state.mesh,
                                 partition_leaves(*out.state.mesh, cfg.virtual_ranks));
  Train train(cfg, out);
  train.emit(1);
  continue_train(cfg, train, out, 2);
  train.finish();
  return out;
}

RunResult restart_train(const RunConfig& cfg, const std::string& from_path) {
  cfg.validate();
  RestartRequest req;
  req.path = from_path;
  req.target_rep = cfg.rep;
  RestartResult restored = restart_from(req);
  RunResult out;
  out.state = std::move(restored.state);
  out.particles = std::move(restored.particles);
  out.last_checkpoint = restored.checkpoint_number;
  Train train(cfg, out);
  continue_train(cfg, train, out, restored.checkpoint_number + 1);
  train.finish();
  return out;
}

}  // namespace amrckpt
