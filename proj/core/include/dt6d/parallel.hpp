#pragma once

#include <cstddef>
#include <functional>

namespace dt6d {

/// Number of workers to use: explicit request, else DT6D_THREADS env var,
/// else hardware concurrency. Always >= 1.
int resolve_worker_count(int requested = 0);

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one chunk
/// per worker. Each index is processed by exactly one worker, so any
/// computation whose per-index result does not depend on scheduling is
/// bit-reproducible for every worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dt6d
