#pragma once

#include <cstdint>
#include <functional>

namespace dualflow {

// Width from DUALFLOW_THREADS (default: hardware concurrency).
int worker_count();

// Runs fn(begin, end) on chunked sub-ranges of [0, n), possibly in parallel.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace dualflow
