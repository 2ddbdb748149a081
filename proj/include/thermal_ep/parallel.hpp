#pragma once

#include <cstddef>
#include <functional>

namespace tep {

// Worker count from TEP_WORKERS, else hardware concurrency.
std::size_t default_workers();

// Calls body(i) for i in [0, count) on up to `workers` threads. Indices are
// handed out dynamically; body must only write to per-index state. The first
// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace tep
