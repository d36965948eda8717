#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "amrckpt/checkpoint.hpp"
#include "amrckpt/errors.hpp"

namespace amrckpt {

enum class IoMode { Sync, Async };
std::string_view to_string(IoMode m);
IoMode parse_io_mode(std::string_view text);

struct AsyncOptions {
  /// Background writer threads.
  int workers = 1;
  /// Submitted writes not yet finished; a further submission blocks.
  int max_in_flight = 2;
  /// Artificial extra duration of every write, to emulate slow storage.
  double write_delay_s = 0.0;
  /// Writers > 1 use the ranked shared-file path.
  int virtual_ranks = 1;

  void validate() const;
};

struct WriteRecord {
  std::int64_t checkpoint_number = 0;
  std::string path;
  /// Time the caller was blocked handing the write over.
  double submit_blocking_s = 0.0;
  /// Time the file write itself took, delay included.
  double background_write_s = 0.0;
  std::uint64_t bytes = 0;
  /// Seconds since the event set was created.
  double completed_at_s = 0.0;
  bool ok = true;
  std::string error;
};

/// Writes `snap` in the calling thread under the same delay and rank options
/// an event set would use. The whole duration counts as blocking.
WriteRecord write_sync(const std::string& path, const CheckpointSnapshot& snap, const AsyncOptions& opts = {});

/// Queue of background checkpoint writes. Submission copies or takes the
/// snapshot, so the caller may keep mutating its state.
class EventSet {
 public:
  explicit EventSet(AsyncOptions opts = {});
  ~EventSet();
  EventSet(const EventSet&) = delete;
  EventSet& operator=(const EventSet&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  const AsyncOptions& options() const noexcept { return opts_; }

  void write_async(const std::string& path, const CheckpointSnapshot& snap);
  void write_async(const std::string& path, CheckpointSnapshot&& snap);

  /// Blocks until nothing is pending and returns every record in submission
  /// order. Failed writes are raised once, as an AsyncWriteError.
  std::vector<WriteRecord> wait();
  /// Waits, then stops the workers. Later submissions throw LifecycleError.
  void close();

  std::size_t pending() const;
  std::vector<WriteRecord> records() const;
  /// Time spent inside wait() so far.
  double wait_time_s() const;

 private:
  struct Job {
    std::size_t slot;
    std::string path;
    std::shared_ptr<const CheckpointSnapshot> snap;
  };

  void submit(const std::string& path, std::shared_ptr<const CheckpointSnapshot> snap,
              std::chrono::steady_clock::time_point t0);
  void stop_workers();
  void worker_loop();
  double since_start() const;

  AsyncOptions opts_;
  std::uint64_t id_;
  std::chrono::steady_clock::time_point start_;

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  std::deque<Job> queue_;
  std::vector<WriteRecord> records_;
  std::vector<AsyncFailure> unreported_;
  std::size_t in_flight_ = 0;
  bool stopping_ = false;
  bool closed_ = false;
  double wait_s_ = 0.0;
  std::vector<std::thread> workers_;
};

struct IoReport {
  IoMode mode = IoMode::Sync;
  int virtual_ranks = 1;
  /// I/O time per call, as seen by each rank.
  double avg_per_rank_blocking_s = 0.0;
  std::int64_t num_calls = 0;
  /// Blocking time attributable to I/O.
  double total_io_time_s = 0.0;
  double total_wall_time_s = 0.0;
  double pct_of_total = 0.0;
};

/// Sync: Σ submit_blocking. Async: Σ submit_blocking + terminal wait.
IoReport io_report(const std::vector<WriteRecord>& records, IoMode mode, double total_wall_time_s,
                   int virtual_ranks = 1, double terminal_wait_s = 0.0);

std::string render_io_table(const std::vector<IoReport>& rows);
std::string io_report_json(const std::vector<IoReport>& rows);

}  // namespace amrckpt
