#pragma once

#include <cstddef>
#include <functional>

namespace hcurlest {

/// Worker count: set_thread_count() if called, else HCURLEST_THREADS, else
/// the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Calls body(i) for i in [0, n) on up to thread_count() threads, in
/// contiguous blocks. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hcurlest
