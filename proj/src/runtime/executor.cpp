#include "aicf/executor.hpp"

#include <chrono>
#include <limits>
#include <vector>

namespace aicf {

ThreadExecutor::ThreadExecutor() : thread_([this] { run(); }) {}

ThreadExecutor::~ThreadExecutor() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

std::uint64_t ThreadExecutor::now_us() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

TimerId ThreadExecutor::schedule(std::uint64_t delay_us, std::function<void()> fn) {
  std::lock_guard lk(mu_);
  TimerId id = next_id_++;
  queue_.emplace(Entry{std::chrono::steady_clock::now() + std::chrono::microseconds(delay_us), id},
                 std::move(fn));
  cv_.notify_all();
  return id;
}

void ThreadExecutor::cancel(TimerId id) {
  std::lock_guard lk(mu_);
  for (auto it = queue_.begin(); it != queue_.end(); ++it) {
    if (it->first.id == id) {
      queue_.erase(it);
      break;
    }
  }
}

void ThreadExecutor::run() {
  std::unique_lock lk(mu_);
  while (!stop_) {
    if (queue_.empty()) {
      cv_.wait(lk);
      continue;
    }
    auto first = queue_.begin();
    auto when = first->first.at;
    if (when > std::chrono::steady_clock::now()) {
      cv_.wait_until(lk, when);
      continue;
    }
    auto fn = std::move(first->second);
    queue_.erase(first);
    lk.unlock();
    fn();
    lk.lock();
  }
}

TimerId VirtualExecutor::schedule_at_ps(std::int64_t t_ps, int rank, std::string subject,
                                        std::function<void()> fn) {
  if (t_ps < now_ps_) t_ps = now_ps_;
  TimerId id = next_seq_++;
  Key key{t_ps, rank, std::move(subject), id};
  by_id_.emplace(id, key);
  queue_.emplace(std::move(key), std::move(fn));
  return id;
}

void VirtualExecutor::cancel(TimerId id) {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return;
  queue_.erase(it->second);
  by_id_.erase(it);
}

bool VirtualExecutor::run_next(std::int64_t limit_ps) {
  if (queue_.empty()) return false;
  auto first = queue_.begin();
  if (first->first.t_ps > limit_ps) return false;
  now_ps_ = first->first.t_ps;
  auto fn = std::move(first->second);
  by_id_.erase(first->first.seq);
  queue_.erase(first);
  ++executed_;
  fn();
  return true;
}

void VirtualExecutor::run_current_instant() {
  const std::int64_t instant = now_ps_;
  while (run_next(instant)) {
  }
}

void VirtualExecutor::run_until_ps(std::int64_t t_ps) {
  while (run_next(t_ps)) {
  }
  if (now_ps_ < t_ps) now_ps_ = t_ps;
}

void VirtualExecutor::run_all() {
  while (run_next(std::numeric_limits<std::int64_t>::max())) {
  }
}

}  // namespace aicf
