#include "mcn/parallel.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace mcn {
namespace {

thread_local bool t_inside_worker = false;

std::int64_t default_thread_count() {
  if (const char* env = std::getenv("MINICONVNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::int64_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<std::int64_t>(hw);
}

class WorkerPool {
 public:
  explicit WorkerPool(std::int64_t workers) {
    for (std::int64_t i = 0; i < workers; ++i) {
      threads_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      ++generation_;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::int64_t size() const { return static_cast<std::int64_t>(threads_.size()); }

  void run(std::int64_t begin, std::int64_t end,
           const std::function<void(std::int64_t, std::int64_t)>& body) {
    {
      std::lock_guard lock(mutex_);
      begin_ = begin;
      end_ = end;
      body_ = &body;
      pending_ = static_cast<std::int64_t>(threads_.size());
      ++generation_;
    }
    cv_start_.notify_all();
    std::unique_lock lock(mutex_);
    cv_done_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
  }

 private:
  void worker_loop(std::int64_t index) {
    t_inside_worker = true;
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::int64_t, std::int64_t)>* body = nullptr;
      std::int64_t begin = 0;
      std::int64_t end = 0;
      {
        std::unique_lock lock(mutex_);
        cv_start_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stopping_) return;
        body = body_;
        begin = begin_;
        end = end_;
      }
      if (body != nullptr) {
        auto [lo, hi] = chunk(begin, end, index, size());
        if (lo < hi) (*body)(lo, hi);
      }
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) cv_done_.notify_all();
      }
    }
  }

  static std::pair<std::int64_t, std::int64_t> chunk(std::int64_t begin, std::int64_t end,
                                                     std::int64_t index, std::int64_t workers) {
    const std::int64_t n = end - begin;
    const std::int64_t base = n / workers;
    const std::int64_t rem = n % workers;
    const std::int64_t lo = begin + index * base + std::min(index, rem);
    const std::int64_t hi = lo + base + (index < rem ? 1 : 0);
    return {lo, hi};
  }

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_start_;
  std::condition_variable cv_done_;
  const std::function<void(std::int64_t, std::int64_t)>* body_ = nullptr;
  std::int64_t begin_ = 0;
  std::int64_t end_ = 0;
  std::int64_t pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stopping_ = false;
};

struct PoolState {
  std::int64_t configured = 0;  // 0 = use default
  std::unique_ptr<WorkerPool> pool;
};

PoolState& pool_state() {
  static PoolState state;
  return state;
}

std::mutex& pool_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::int64_t thread_count() {
  std::lock_guard lock(pool_mutex());
  PoolState& state = pool_state();
  return state.configured > 0 ? state.configured : default_thread_count();
}

void set_thread_count(std::int64_t count) {
  std::lock_guard lock(pool_mutex());
  PoolState& state = pool_state();
  state.configured = count > 0 ? count : 0;
  state.pool.reset();
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (end <= begin) return;
  const std::int64_t span = end - begin;
  if (t_inside_worker || span == 1) {
    body(begin, end);
    return;
  }
  WorkerPool* pool = nullptr;
  {
    std::lock_guard lock(pool_mutex());
    PoolState& state = pool_state();
    const std::int64_t want = state.configured > 0 ? state.configured : default_thread_count();
    if (want <= 1) {
      // fall through to inline execution below
    } else {
      if (!state.pool || state.pool->size() != want) {
        state.pool = std::make_unique<WorkerPool>(want);
      }
      pool = state.pool.get();
    }
  }
  if (pool == nullptr) {
    body(begin, end);
    return;
  }
  pool->run(begin, end, body);
}

}  // namespace mcn
