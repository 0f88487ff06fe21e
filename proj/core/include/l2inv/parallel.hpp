#pragma once

#include <cstddef>
#include <functional>

namespace l2inv {

/// Worker count for grid evaluations. Defaults to $L2INV_THREADS, else 1.
/// Results never depend on this value: workers only fill disjoint slots
/// and every reduction runs sequentially afterwards.
int thread_count();
void set_thread_count(int n);

/// Calls body(i) for i in [0, n), split into contiguous chunks across
/// thread_count() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace l2inv
