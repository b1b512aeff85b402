#pragma once

#include <cstddef>
#include <functional>

namespace vg {

/// Worker count: VG_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is visited exactly once; callers write results by index, so the outcome
/// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vg
