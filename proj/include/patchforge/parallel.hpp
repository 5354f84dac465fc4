#pragma once

#include <cstddef>
#include <functional>

namespace patchforge {

// 0 or negative -> hardware concurrency (at least 1).
int resolve_workers(int workers);

// Runs fn(i) for every i in [0, n) on a pool of `workers` threads and joins.
// Determinism contract: fn must write only to its own index's slot, so the
// merged result is independent of scheduling. The first exception thrown by
// any worker is rethrown after the pool drains; remaining indices are skipped.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace patchforge
