#pragma once

#include <cstddef>
#include <functional>

namespace hclab {

/// Number of worker threads used by replica loops (default: hardware concurrency).
int thread_count();
void set_thread_count(int n);

/// Run body(i) for i in [0, n). Work is split into contiguous chunks; callers
/// store results by index so the outcome does not depend on the thread count.
/// The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hclab
