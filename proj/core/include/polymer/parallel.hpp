#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace polymer {

// Worker count used by ensemble loops. Defaults to POLYMER_THREADS from the
// environment, else std::thread::hardware_concurrency().
std::size_t worker_count();
void set_worker_count(std::size_t n);

// Runs body(i) for i in [0, n) over contiguous blocks. Each index is handled
// exactly once and callers write results by index, so output does not depend
// on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Fixed-tree pairwise summation: the reduction order depends only on the
// length of the input.
double pairwise_sum(std::span<const double> values);

// Pairwise sum after sorting, so the result is invariant under any
// permutation of the input.
double canonical_sum(std::span<const double> values);

}  // namespace polymer
