#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "util.hpp"

namespace fraclap {
namespace {
std::atomic<int> g_default{0};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const int d = g_default.load(); d > 0) return d;
  if (const char* env = std::getenv("FRACLAP_THREADS")) {
    try {
      const long n = parse_long(env, "FRACLAP_THREADS");
      if (n > 0) return static_cast<int>(std::min(n, 1024L));
    } catch (...) {
      // malformed value: fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int n) { g_default.store(std::max(0, n)); }
int default_threads() { return resolve_threads(0); }

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr error;
  auto run = [&] {
    for (std::size_t i; !stop.load(std::memory_order_relaxed) && (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          error = std::current_exception();
        }
        stop = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace fraclap
