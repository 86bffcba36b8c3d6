#pragma once

// Fixed-width fork/join pool. parallel_for splits [0, n) into exactly one
// contiguous chunk per worker and wakes every worker each call, so the
// dispatch cost per call is constant in n. Work is assigned by position,
// never stolen, which keeps "who computes what" independent of timing.

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qd {

class ThreadPool {
 public:
  // threads <= 1 means no workers; parallel_for then runs inline.
  explicit ThreadPool(int threads) {
    const int workers = threads > 1 ? threads : 0;
    workers_.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      workers_.emplace_back([this, w, workers] { worker_loop(w, workers); });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
      ++job_generation_;
    }
    start_cv_.notify_all();
    for (std::thread& t : workers_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const {
    return workers_.empty() ? 1 : static_cast<int>(workers_.size());
  }

  // fn(i) is called once for every i in [0, n), partitioned into
  // thread_count() contiguous chunks. Blocks until all chunks finish.
  void parallel_for(int n, const std::function<void(int)>& fn) {
    if (workers_.empty()) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      job_fn_ = &fn;
      job_n_ = n;
      pending_.store(static_cast<int>(workers_.size()),
                     std::memory_order_relaxed);
      ++job_generation_;
    }
    start_cv_.notify_all();
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] {
      return pending_.load(std::memory_order_acquire) == 0;
    });
    job_fn_ = nullptr;
  }

 private:
  void worker_loop(int index, int workers) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int)>* fn = nullptr;
      int n = 0;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        start_cv_.wait(lock, [&] { return job_generation_ != seen; });
        seen = job_generation_;
        if (stop_) return;
        fn = job_fn_;
        n = job_n_;
      }
      // Chunk w covers [w*n/W, (w+1)*n/W): fixed by position.
      const int begin = static_cast<int>(
          (static_cast<long long>(index) * n) / workers);
      const int end = static_cast<int>(
          (static_cast<long long>(index + 1) * n) / workers);
      for (int i = begin; i < end; ++i) (*fn)(i);
      if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::lock_guard<std::mutex> lock(mutex_);
        done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_fn_ = nullptr;
  int job_n_ = 0;
  uint64_t job_generation_ = 0;
  std::atomic<int> pending_{0};
  bool stop_ = false;
};

}  // namespace qd
