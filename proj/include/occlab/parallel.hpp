#pragma once

#include <cstddef>
#include <functional>

namespace occlab {

/// Hardware threads, at least 1.
std::size_t default_thread_count();

/// Calls body(i) for i in [0, count) on up to `threads` workers (0 = all
/// cores). Work is handed out by an atomic counter and every result must be
/// written to slot i, so output never depends on scheduling. Rethrows the
/// exception of the smallest failing index.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

/// Pairwise summation in index order.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace occlab
