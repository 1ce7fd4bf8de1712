#pragma once

#include <cstdint>
#include <functional>

namespace pottsrf {

/// Runs fn(begin, end) over a partition of [0, n). With threads <= 1 the call
/// happens inline on the calling thread. Chunks are independent; callers must
/// not rely on cross-chunk ordering unless threads == 1.
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

/// Resolves a thread-count request: 0 or negative falls back to the
/// POTTS_THREADS environment variable, then to the hardware count.
int resolve_threads(int requested);

}  // namespace pottsrf
