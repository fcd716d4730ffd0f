#pragma once

#include <cstddef>
#include <functional>

namespace ckt {

/// Run fn(i) for i in [0, count) on up to n_threads workers.
///
/// Work is assigned round-robin by index (worker w handles i == w mod T,
/// in increasing i), so which worker computes which item is a function of
/// n_threads alone, never of scheduling. Callers that reduce per-worker
/// results must do so in worker order to stay deterministic for a fixed
/// thread count. With n_threads <= 1 everything runs inline.
void parallel_for(std::size_t count, std::size_t n_threads,
                  const std::function<void(std::size_t index, std::size_t worker)>& fn);

}  // namespace ckt
