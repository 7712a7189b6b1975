#pragma once

#include <cstddef>
#include <functional>

namespace retexkit {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work is handed out by index, so
// results written to per-index slots do not depend on the worker count. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Thread count from an explicit value (>0), else RETEXKIT_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace retexkit
