#include "hcurlest/parallel.hpp"

#include "hcurlest/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hcurlest {

namespace {

std::atomic<int> g_override{0};

int from_environment() {
  const char* s = std::getenv("HCURLEST_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw InvalidInput("HCURLEST_THREADS must be an integer in [1, 1024]");
  return static_cast<int>(v);
}

}  // namespace

int thread_count() {
  if (const int n = g_override.load()) return n;
  if (const int n = from_environment()) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(int n) {
  if (n < 0) throw InvalidInput("thread count must be non-negative");
  g_override.store(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hcurlest
