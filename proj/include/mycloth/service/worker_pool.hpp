#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

namespace mycloth::service {

// Fixed number of threads draining a bounded FIFO queue.
class WorkerPool {
 public:
  WorkerPool(std::size_t workers, std::size_t max_queue);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // Throws UnavailableError when max_queue jobs are already waiting.
  std::future<void> submit(std::function<void()> job);

  std::size_t workers() const { return threads_.size(); }
  std::size_t queued() const;

 private:
  void run();

  std::size_t max_queue_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::deque<std::packaged_task<void()>> queue_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace mycloth::service
