#pragma once

#include <cstddef>
#include <functional>

namespace fchern {

/// Worker count: hardware concurrency, capped by FCHERN_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; callers write results by index and reduce afterwards
/// in a fixed order, so output does not depend on the thread count. If
/// bodies throw, the exception from the lowest failing index is rethrown.
/// Calls made from inside a running loop execute serially on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fchern
