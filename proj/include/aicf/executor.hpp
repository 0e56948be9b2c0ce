#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace aicf {

using TimerId = std::uint64_t;

/// Time and deferred-work source. Framework components schedule all timers
/// through this seam so they run identically on wall-clock threads and on
/// the simulator's virtual clock.
class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::uint64_t now_us() = 0;
  virtual TimerId schedule(std::uint64_t delay_us, std::function<void()> fn) = 0;
  virtual void cancel(TimerId id) = 0;

  void post(std::function<void()> fn) { schedule(0, std::move(fn)); }
};

/// Wall-clock executor backed by a single timer thread. Callbacks run on
/// that thread, one at a time.
class ThreadExecutor : public Executor {
 public:
  ThreadExecutor();
  ~ThreadExecutor() override;

  std::uint64_t now_us() override;
  TimerId schedule(std::uint64_t delay_us, std::function<void()> fn) override;
  void cancel(TimerId id) override;

 private:
  void run();

  struct Entry {
    std::chrono::steady_clock::time_point at;
    TimerId id;
    bool operator<(const Entry& o) const { return at == o.at ? id < o.id : at < o.at; }
  };

  std::mutex mu_;
  std::condition_variable cv_;
  std::map<Entry, std::function<void()>> queue_;
  TimerId next_id_ = 1;
  bool stop_ = false;
  std::thread thread_;
};

/// Deterministic virtual-time executor. Events are ordered by
/// (time, rank, subject, insertion sequence); ranks let the simulator pin
/// same-instant ordering between event classes. Single-threaded: callers
/// drive it via the run_* methods.
class VirtualExecutor : public Executor {
 public:
  static constexpr int kRankMessage = 10;
  static constexpr std::int64_t kPsPerUs = 1'000'000;

  std::uint64_t now_us() override { return static_cast<std::uint64_t>(now_ps_ / kPsPerUs); }
  std::int64_t now_ps() const { return now_ps_; }

  TimerId schedule(std::uint64_t delay_us, std::function<void()> fn) override {
    return schedule_at_ps(now_ps_ + static_cast<std::int64_t>(delay_us) * kPsPerUs, kRankMessage,
                          {}, std::move(fn));
  }
  TimerId schedule_at_ps(std::int64_t t_ps, int rank, std::string subject,
                         std::function<void()> fn);
  void cancel(TimerId id) override;

  /// Runs every event scheduled at the current instant (including ones those
  /// events add at the same instant). Does not advance time.
  void run_current_instant();
  /// Runs events in time order up to and including t_ps.
  void run_until_ps(std::int64_t t_ps);
  /// Runs until the queue is empty.
  void run_all();

  bool empty() const { return queue_.empty(); }
  std::size_t executed() const { return executed_; }

 private:
  struct Key {
    std::int64_t t_ps;
    int rank;
    std::string subject;
    std::uint64_t seq;
    bool operator<(const Key& o) const {
      if (t_ps != o.t_ps) return t_ps < o.t_ps;
      if (rank != o.rank) return rank < o.rank;
      if (subject != o.subject) return subject < o.subject;
      return seq < o.seq;
    }
  };

  bool run_next(std::int64_t limit_ps);

  std::map<Key, std::function<void()>> queue_;
  std::map<TimerId, Key> by_id_;
  std::int64_t now_ps_ = 0;
  std::uint64_t next_seq_ = 1;
  std::size_t executed_ = 0;
};

}  // namespace aicf
