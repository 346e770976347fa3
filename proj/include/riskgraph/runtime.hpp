#pragma once

#include <cstddef>
#include <functional>

namespace riskgraph::runtime {

/// Worker cap: min(RISKGRAPH_THREADS, hardware cores), at least 1. Read once.
std::size_t max_threads();

/// Runs fn(i) for i in [0, n) across up to max_threads() workers with static
/// striding. fn must only write to per-index slots; combining results in
/// index order afterwards keeps every computation bit-stable regardless of
/// the thread count. Exceptions are rethrown (first by index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace riskgraph::runtime
