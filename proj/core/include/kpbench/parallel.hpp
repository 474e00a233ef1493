#pragma once

#include <cstddef>
#include <functional>

namespace kpbench {

// Calls fn(i) for every i in [0, count) on up to `workers` threads pulling
// indices from a shared counter. The first exception thrown by fn is
// rethrown after all threads have joined; remaining indices are skipped.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace kpbench
