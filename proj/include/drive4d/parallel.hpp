#pragma once

#include <cstddef>
#include <functional>

namespace drive4d {

// Process-wide worker bound. 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned count);
unsigned thread_count();

// Calls fn(begin, end) over disjoint contiguous chunks of [0, n). Chunk
// boundaries depend on the thread count, so callers must write results into
// per-index slots and reduce them afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace drive4d
