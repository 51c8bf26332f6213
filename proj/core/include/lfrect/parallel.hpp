#pragma once

#include <cstddef>
#include <functional>

namespace lfrect {

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. Exceptions thrown
/// by fn are rethrown on the calling thread (the first one wins).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace lfrect
