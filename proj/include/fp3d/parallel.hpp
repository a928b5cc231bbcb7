#pragma once

#include <cstddef>
#include <functional>

namespace fp3d {

/// Worker count: FP3D_THREADS if set and > 0, else hardware concurrency.
int thread_count();

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per worker.
/// Chunk boundaries do not depend on the worker count reaching any particular
/// value, and callers must write disjoint outputs, so results are identical
/// for any thread setting.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace fp3d
