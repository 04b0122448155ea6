#include "diamond/parallel.hpp"

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace diamond {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  int workers = std::min(threads, count);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&](int w) {
    // contiguous block per worker
    long lo = static_cast<long>(w) * count / workers;
    long hi = static_cast<long>(w + 1) * count / workers;
    try {
      for (long i = lo; i < hi; ++i) fn(static_cast<int>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace diamond
