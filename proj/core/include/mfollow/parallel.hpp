#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mfollow {

/// Worker count for parallel sections: explicit argument wins, otherwise
/// the MFOLLOW_THREADS environment variable, otherwise 1.
std::size_t configured_threads();
void set_thread_override(std::size_t threads);  // 0 clears the override

/// Runs fn(begin, end) over fixed-size blocks of [0, n). The block layout
/// is independent of the worker count, so any reduction that combines
/// per-block results in block order is bit-reproducible across thread
/// counts.
void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         std::size_t block_size = 2048);

/// Block-deterministic sum of term(i) over [0, n): per-block partial sums
/// are taken sequentially and combined in ascending block order.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                    std::size_t block_size = 2048);

} // namespace mfollow
