#pragma once

#include <cstddef>
#include <functional>

namespace varest {

/// Worker count: `requested` if nonzero, else hardware concurrency; always capped by
/// the VAREST_THREADS environment variable when it holds a positive integer.
unsigned worker_count(unsigned requested = 0);

/// Runs fn(0..count-1) on up to `threads` workers. Each index runs exactly once; callers
/// write results into per-index slots so output never depends on scheduling. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace varest
