#pragma once

#include <cstddef>
#include <functional>

namespace fraclap {

/// Worker count used by assembly. Explicit value > 0 wins, then FRACLAP_THREADS,
/// then the hardware concurrency.
int resolve_threads(int requested = 0);

/// Global default installed by the front ends (0 = resolve on each call).
void set_default_threads(int n);
int default_threads();

/// Calls body(i) for i in [0,n) on up to `threads` workers. Exceptions are
/// rethrown on the caller; which one wins when several workers fail is the lowest index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace fraclap
