#include "mycloth/service/worker_pool.hpp"

#include "mycloth/service/studio.hpp"

namespace mycloth::service {

WorkerPool::WorkerPool(std::size_t workers, std::size_t max_queue) : max_queue_(max_queue) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

std::future<void> WorkerPool::submit(std::function<void()> job) {
  std::packaged_task<void()> task(std::move(job));
  std::future<void> result = task.get_future();
  {
    std::lock_guard lock(mutex_);
    if (queue_.size() >= max_queue_) throw UnavailableError("try-on queue is full");
    queue_.push_back(std::move(task));
  }
  wake_.notify_one();
  return result;
}

std::size_t WorkerPool::queued() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

void WorkerPool::run() {
  for (;;) {
    std::packaged_task<void()> task;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

}  // namespace mycloth::service
