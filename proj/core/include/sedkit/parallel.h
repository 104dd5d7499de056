#pragma once

#include <cstddef>
#include <functional>

namespace sedkit {

// 0 means one thread per hardware core.
std::size_t resolve_threads(std::size_t requested);

// Runs fn(i) for every i in [0, n) on up to `threads` workers. Work items must
// write to disjoint outputs; the first exception thrown is rethrown here after
// all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace sedkit
