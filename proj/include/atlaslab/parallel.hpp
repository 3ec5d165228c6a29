#pragma once

#include <cstddef>
#include <functional>

namespace atlaslab {

// Runs body(0..n-1) across `threads` workers pulling indices from a shared
// atomic counter. Replicas own their RNG streams and write to caller-owned,
// index-addressed slots, so the merged result is independent of scheduling;
// that is what makes parallel and serial runs byte-identical.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// 0 -> hardware concurrency (at least 1).
unsigned resolve_threads(int requested);

}  // namespace atlaslab
