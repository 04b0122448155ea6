#pragma once

#include <functional>

namespace diamond {

/// Runs fn(i) for i in [0, count) on `threads` workers with a static
/// contiguous partition. Each index must touch disjoint data; results are
/// then identical for any thread count. The first exception thrown by a
/// worker is rethrown on the calling thread after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace diamond
