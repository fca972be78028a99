#pragma once

// Minimal deterministic work sharing: split [0,n) into contiguous chunks, one
// per worker thread. Callers write into preallocated disjoint slots, so the
// result never depends on scheduling; all randomness is counter-keyed anyway.

#include <cstddef>
#include <functional>

namespace keig {

// Process-wide default worker count; 0 means hardware concurrency.
int default_threads();
void set_default_threads(int threads);

// Runs fn(begin, end) over a partition of [0, n). threads <= 0 uses the
// process default. Runs inline when one worker suffices.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads = 0);

}  // namespace keig
