#pragma once

#include <cstdint>
#include <functional>

namespace omnisweep {

// Number of worker threads implied by a user-facing thread count:
// 0 means "use hardware concurrency".
int resolve_threads(int threads);

// Static-partition parallel loop over [begin, end). The range is split into
// `threads` contiguous chunks; fn(i) must write only state owned by index i
// so results do not depend on the schedule. threads <= 1 runs inline.
void parallel_for(int64_t begin, int64_t end, int threads,
                  const std::function<void(int64_t)>& fn);

// Chunked variant: fn(chunk_begin, chunk_end) per worker. Useful when the
// body wants tight inner loops without a per-index std::function call.
void parallel_chunks(int64_t begin, int64_t end, int threads,
                     const std::function<void(int64_t, int64_t)>& fn);

}  // namespace omnisweep
