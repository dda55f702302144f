#pragma once

#include <cstdint>
#include <functional>

namespace fkbridge {

/// Worker cap used by kernel assembly and path sampling. Defaults to the
/// hardware concurrency, overridable by FKBRIDGE_THREADS or set_max_threads.
int max_threads();
void set_max_threads(int n);

/// Runs chunk_fn(lo, hi) over a static block partition of [begin, end).
/// Chunks must write disjoint state; results are then identical for any
/// thread count.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& chunk_fn);

}  // namespace fkbridge
