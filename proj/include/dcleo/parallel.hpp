#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace dcleo {

/// Worker count: DISPATCH_CLEO_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Bodies must only
/// write to index-owned storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise summation; the result depends only on the values and their order.
double pairwise_sum(std::span<const double> values);

}  // namespace dcleo
