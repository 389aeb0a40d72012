#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gtsim {

/// Persistent fork-join pool for the per-agent phase of an iteration.
/// parallel_for returns only after every index has been processed, so each
/// call is one barrier-synchronized round.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

  void parallel_for(int n, const std::function<void(int)>& fn);

 private:
  void worker_loop(unsigned id);
  void run_slice(unsigned id, int n, const std::function<void(int)>& fn) const;

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  int job_size_ = 0;
  unsigned long generation_ = 0;
  unsigned pending_ = 0;
  bool stop_ = false;
};

}  // namespace gtsim
