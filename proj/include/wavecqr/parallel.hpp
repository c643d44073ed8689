#pragma once

#include <cstddef>
#include <functional>

namespace wavecqr {

/// Thread count to use for `requested` (<= 0 means all hardware threads).
int resolve_threads(int requested);

/// Runs job(0..count-1) on up to `threads` worker threads. Jobs must write
/// only to their own output slot. The exception of the lowest failing index,
/// if any, is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace wavecqr
