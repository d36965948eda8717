#include "amrckpt/async_io.hpp"

#include <atomic>
#include <cstdio>

#include <json.hpp>

#include "amrckpt/errors.hpp"

namespace amrckpt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

std::atomic<std::uint64_t> next_es_id{1};

// Writes the file and applies the configured delay; returns bytes.
std::uint64_t perform_write(const std::string& path, const CheckpointSnapshot& snap, const AsyncOptions& opts) {
  std::uint64_t bytes = 0;
  if (opts.virtual_ranks > 1) bytes = write_checkpoint_ranked(path, snap, opts.virtual_ranks).bytes;
  else bytes = write_checkpoint(path, snap);
  if (opts.write_delay_s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(opts.write_delay_s));
  return bytes;
}

}  // namespace

std::string_view to_string(IoMode m) { return m == IoMode::Sync ? "Sync" : "Async"; }

IoMode parse_io_mode(std::string_view text) {
  if (text == "sync" || text == "Sync") return IoMode::Sync;
  if (text == "async" || text == "Async") return IoMode::Async;
  throw ConfigError("unknown io mode '" + std::string(text) + "' (expected sync or async)");
}

void AsyncOptions::validate() const {
  if (workers < 1) throw ConfigError("async workers must be at least 1");
  if (max_in_flight < 1) throw ConfigError("async max_in_flight must be at least 1");
  if (!(write_delay_s >= 0.0)) throw ConfigError("write delay must be non-negative");
  if (virtual_ranks < 1) throw ConfigError("virtual ranks must be at least 1");
}

WriteRecord write_sync(const std::string& path, const CheckpointSnapshot& snap, const AsyncOptions& opts) {
  opts.validate();
  WriteRecord rec;
  rec.checkpoint_number = snap.checkpoint_number;
  rec.path = path;
  const auto t0 = Clock::now();
  rec.bytes = perform_write(path, snap, opts);
  rec.background_write_s = seconds(Clock::now() - t0);
  rec.submit_blocking_s = rec.background_write_s;
  rec.completed_at_s = rec.background_write_s;
  return rec;
}

EventSet::EventSet(AsyncOptions opts) : opts_(opts), id_(next_es_id++), start_(Clock::now()) { opts_.validate(); }

EventSet::~EventSet() {
  try {
    close();
  } catch (...) {
    // Failures not collected by wait() are dropped with the event set.
  }
}

double EventSet::since_start() const { return seconds(Clock::now() - start_); }

void EventSet::write_async(const std::string& path, const CheckpointSnapshot& snap) {
  const auto t0 = Clock::now();
  {
    std::lock_guard lock(mu_);
    if (closed_) throw LifecycleError("write_async on closed event set " + std::to_string(id_));
  }
  submit(path, std::make_shared<const CheckpointSnapshot>(snap), t0);
}

void EventSet::write_async(const std::string& path, CheckpointSnapshot&& snap) {
  const auto t0 = Clock::now();
  submit(path, std::make_shared<const CheckpointSnapshot>(std::move(snap)), t0);
}

void EventSet::submit(const std::string& path, std::shared_ptr<const CheckpointSnapshot> snap, Clock::time_point t0) {
  std::unique_lock lock(mu_);
  if (closed_) throw LifecycleError("write_async on closed event set " + std::to_string(id_));
  if (workers_.empty()) {
    for (int w = 0; w < opts_.workers; ++w) workers_.emplace_back([this] { worker_loop(); });
  }
  done_cv_.wait(lock, [&] { return in_flight_ < static_cast<std::size_t>(opts_.max_in_flight); });
  const std::size_t slot = records_.size();
  WriteRecord rec;
  rec.checkpoint_number = snap->checkpoint_number;
  rec.path = path;
  records_.push_back(rec);
  queue_.push_back({slot, path, std::move(snap)});
  ++in_flight_;
  records_[slot].submit_blocking_s = seconds(Clock::now() - t0);
  work_cv_.notify_one();
}

void EventSet::worker_loop() {
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mu_);
      work_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    const auto t0 = Clock::now();
    std::uint64_t bytes = 0;
    std::string error;
    try {
      bytes = perform_write(job.path, *job.snap, opts_);
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double dt = seconds(Clock::now() - t0);
    job.snap.reset();
    std::lock_guard lock(mu_);
    WriteRecord& rec = records_[job.slot];
    rec.background_write_s = dt;
    rec.bytes = bytes;
    rec.completed_at_s = since_start();
    rec.ok = error.empty();
    rec.error = error;
    if (!rec.ok) unreported_.push_back({rec.checkpoint_number, rec.path, error});
    --in_flight_;
    done_cv_.notify_all();
  }
}

std::vector<WriteRecord> EventSet::wait() {
  const auto t0 = Clock::now();
  std::unique_lock lock(mu_);
  done_cv_.wait(lock, [&] { return in_flight_ == 0; });
  wait_s_ += seconds(Clock::now() - t0);
  if (!unreported_.empty()) {
    auto failures = std::move(unreported_);
    unreported_.clear();
    throw AsyncWriteError(std::move(failures));
  }
  return records_;
}

void EventSet::stop_workers() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    stopping_ = true;
  }
  work_cv_.notify_all();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

void EventSet::close() {
  try {
    wait();
  } catch (...) {
    stop_workers();
    throw;
  }
  stop_workers();
}

std::size_t EventSet::pending() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

std::vector<WriteRecord> EventSet::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

double EventSet::wait_time_s() const {
  std::lock_guard lock(mu_);
  return wait_s_;
}

IoReport io_report(const std::vector<WriteRecord>& records, IoMode mode, double total_wall_time_s, int virtual_ranks,
                   double terminal_wait_s) {
  if (!(total_wall_time_s > 0.0)) throw ConfigError("io_report needs a positive total wall time");
  IoReport r;
  r.mode = mode;
  r.virtual_ranks = virtual_ranks;
  r.num_calls = static_cast<std::int64_t>(records.size());
  for (const auto& rec : records) r.total_io_time_s += rec.submit_blocking_s;
  if (mode == IoMode::Async) r.total_io_time_s += terminal_wait_s;
  r.total_wall_time_s = total_wall_time_s;
  // Every virtual rank is blocked for the same wall time on each call.
  r.avg_per_rank_blocking_s = r.num_calls > 0 ? r.total_io_time_s / static_cast<double>(r.num_calls) : 0.0;
  r.pct_of_total = 100.0 * r.total_io_time_s / total_wall_time_s;
  return r;
}

std::string render_io_table(const std::vector<IoReport>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %12s %10s %12s %17s\n", "I/O", "Avg/proc(s)", "Num calls", "I/O Time(s)",
                "% of Tot. on I/O");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-6s %12.3f %10lld %12.3f %17.3f\n", std::string(to_string(r.mode)).c_str(),
                  r.avg_per_rank_blocking_s, static_cast<long long>(r.num_calls), r.total_io_time_s, r.pct_of_total);
    out += line;
  }
  return out;
}

std::string io_report_json(const std::vector<IoReport>& rows) {
  nlohmann::ordered_json j;
  j["schema"] = "amrckpt.io_report.v1";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"mode", std::string(to_string(r.mode))},
                         {"virtual_ranks", r.virtual_ranks},
                         {"avg_per_rank_blocking_s", r.avg_per_rank_blocking_s},
                         {"num_calls", r.num_calls},
                         {"total_io_time_s", r.total_io_time_s},
                         {"total_wall_time_s", r.total_wall_time_s},
                         {"pct_of_total", r.pct_of_total}});
  }
  return j.dump(2) + "\n";
}

}  // namespace amrckpt
