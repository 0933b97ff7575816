#pragma once

#include <functional>

// Deterministic fan-out helper: tasks write to pre-sized slots indexed by task
// id, so results never depend on scheduling. Worker count comes from the
// LAMBDAMEM_WORKERS environment variable (default: hardware concurrency).

namespace lambdamem {

// Number of workers parallel_for will use (≥ 1).
int worker_count();

// Runs fn(0) … fn(n−1) across the worker pool. fn must not throw; capture
// errors into per-index slots and rethrow after the loop.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace lambdamem
