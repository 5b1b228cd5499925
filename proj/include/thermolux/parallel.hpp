#pragma once

#include <cstddef>
#include <functional>

namespace thermolux {

/// Worker count for internal parallel loops: hardware concurrency, capped by
/// the THERMOLUX_THREADS environment variable when it holds a positive integer.
unsigned thread_budget();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks are
/// handed out in index order; results must not depend on which worker runs
/// which task.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace thermolux
