#include "pdistill/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace pdistill {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_worker_count(unsigned n) { g_workers = n == 0 ? 1 : n; }
unsigned worker_count() { return g_workers; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
  unsigned workers = g_workers;
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers && w < n; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace pdistill
