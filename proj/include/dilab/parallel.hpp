#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace dilab {

/// Worker count used by the Monte-Carlo estimators. 0 selects the number of logical cores.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs body(i) for i in [0, n) on the worker pool. Each index is visited exactly once;
/// callers write to disjoint slots so the result does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation. The association order depends only on the length.
double pairwise_sum(std::span<const double> values);

} // namespace dilab
